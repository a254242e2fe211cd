use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use meanlogic_ffi::*;

const A: &str = r#"{"signature":{"constants":["c"],"relations":[{"name":"R","arity":1,"bound":"1","modulus":[["1","0"]]}]},
"universe":["a0","a1"],"metric":[["0","1"],["1","0"]],"constants":{"c":"a0"},"relations":{"R":["0","1"]}}"#;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    ml_string_free(s);
    out
}

#[test]
fn evaluate_and_build_means() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(
            ml_structure_from_json(cstr(A).as_ptr(), &mut s),
            MlStatus::Ok
        );
        let mut n = 0usize;
        assert_eq!(ml_structure_size(s, &mut n), MlStatus::Ok);
        assert_eq!(n, 2);

        let mut f = ptr::null_mut();
        assert_eq!(
            ml_formula_parse(cstr("R(x) + d(x,c)").as_ptr(), s, &mut f),
            MlStatus::Ok
        );
        let mut linear = false;
        assert_eq!(ml_formula_is_linear(f, 1, &mut linear), MlStatus::Ok);
        assert!(linear);
        let mut v = ptr::null_mut();
        assert_eq!(
            ml_eval(f, s, cstr(r#"{"x":"a1"}"#).as_ptr(), &mut v),
            MlStatus::Ok
        );
        assert_eq!(take(v), "2");
        assert_eq!(ml_eval(f, s, ptr::null(), &mut v), MlStatus::Unassigned);
        ml_formula_free(f);

        let mut c = ptr::null_mut();
        let charge = cstr(r#"{"index":["0","1"],"weights":["1/2","1/2"]}"#);
        assert_eq!(ml_charge_from_json(charge.as_ptr(), &mut c), MlStatus::Ok);
        let mut m = ptr::null_mut();
        assert_eq!(ml_powermean(s, c, 1, &mut m), MlStatus::Ok);
        let mut k = 0usize;
        assert_eq!(ml_mean_class_count(m, &mut k), MlStatus::Ok);
        assert_eq!(k, 4);
        let mut side = ptr::null_mut();
        assert_eq!(ml_mean_sidecar_json(m, &mut side), MlStatus::Ok);
        assert!(take(side).contains("\"q3\""));
        let mut base = ptr::null_mut();
        assert_eq!(ml_mean_base(m, &mut base), MlStatus::Ok);
        let mut valid = false;
        let mut report = ptr::null_mut();
        assert_eq!(
            ml_structure_validate(base, 1, &mut valid, &mut report),
            MlStatus::Ok
        );
        assert!(valid);
        assert_eq!(take(report), "[]");

        let factors = [s as *const MlStructure, base as *const MlStructure];
        ml_mean_free(m);
        assert_eq!(
            ml_ultramean(factors.as_ptr(), 2, c, 1, &mut m),
            MlStatus::Ok
        );
        assert_eq!(ml_mean_class_count(m, &mut k), MlStatus::Ok);
        assert_eq!(k, 8);
        ml_mean_free(m);
        assert_eq!(
            ml_ultramean(factors.as_ptr(), 1, c, 1, &mut m),
            MlStatus::Domain
        );
        ml_structure_free(base);
        ml_charge_free(c);
        ml_structure_free(s);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(
            ml_structure_from_json(ptr::null(), &mut s),
            MlStatus::NullPointer
        );
        assert_eq!(
            ml_structure_from_json(cstr("{}").as_ptr(), &mut s),
            MlStatus::Structural
        );
        let msg = CStr::from_ptr(ml_last_error()).to_str().unwrap();
        assert!(msg.contains("signature"), "{msg}");
        let mut c = ptr::null_mut();
        let bad = cstr(r#"{"index":["0"],"weights":["1/2"]}"#);
        assert_eq!(ml_charge_from_json(bad.as_ptr(), &mut c), MlStatus::Domain);
        ml_structure_free(ptr::null_mut());
        ml_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_api() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/meanlogic.h"))
            .unwrap();
    for name in [
        "ml_last_error",
        "ml_structure_from_json",
        "ml_formula_parse",
        "ml_eval",
        "ml_powermean",
        "ml_ultramean",
        "ml_mean_free",
        "ML_STATUS_CAP_EXCEEDED",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

/// Compiles and runs a C program against the header and the static library.
#[test]
fn c_program_links() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libmeanlogic_ffi.a");
    if !lib.exists() {
        let status = Command::new(env!("CARGO"))
            .args(["build", "-p", "meanlogic-ffi", "--lib"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let lib = if lib.exists() {
        lib
    } else {
        // cargo build uses the dev profile; the test may run under another one
        profile_dir
            .parent()
            .unwrap()
            .join("debug")
            .join("libmeanlogic_ffi.a")
    };
    assert!(
        lib.exists(),
        "static library not found at {}",
        lib.display()
    );
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .expect("a C compiler is available");
    assert!(status.success(), "C compilation failed");
    let run = Command::new(&out).output().unwrap();
    assert!(
        run.status.success(),
        "smoke program exited with {:?}",
        run.status
    );
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
