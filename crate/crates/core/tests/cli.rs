//! The command-line interface, in process and as a binary.

use std::path::PathBuf;
use std::process::Command;

use meanlogic::cli::run;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("meanlogic").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(args: &[&str]) -> (i32, serde_json::Value) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let (code, out, err) = call(&full);
    let value =
        serde_json::from_str(&out).unwrap_or_else(|e| panic!("invalid JSON ({e}): {out}\n{err}"));
    (code, value)
}

#[test]
fn eval_sup() {
    let (code, out, _) = call(&[
        "eval",
        "--structure",
        &data("A.json"),
        "--formula",
        "sup x. R(x)",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "1");
}

#[test]
fn eval_with_assignment() {
    let (code, out, _) = call(&[
        "eval",
        "--structure",
        &data("A.json"),
        "--formula",
        "R(x) + d(x,c)",
        "--assign",
        "x=a1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "2");
}

#[test]
fn los_point_mass() {
    let (code, _, err) = call(&[
        "check",
        "los",
        "--structures",
        &data("P0.json"),
        &data("P1.json"),
        "--pointmass",
        "1",
        "--fragment",
        &data("frag.json"),
    ]);
    assert_eq!(code, 0, "{err}");
}

#[test]
fn preserved_counterexample() {
    let (code, report) = json(&[
        "check",
        "preserved",
        "--formula",
        "min(R(c),1 + -1*R(c))",
        "--pairs",
        &data("pairs.json"),
    ]);
    assert_eq!(code, 1);
    let row = &report["rows"][0];
    assert_eq!(row["epsilon"], "1/2");
    assert_eq!(row["mean"], "1/2");
    assert_eq!(row["integral"], "0");
}

#[test]
fn json_everywhere() {
    let (a, p0, p1, frag) = (
        data("A.json"),
        data("P0.json"),
        data("P1.json"),
        data("frag.json"),
    );
    let (u, t, unary) = (
        data("uniform2.json"),
        data("thirds.json"),
        data("unary.json"),
    );
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["validate", "--structure", &a], 0),
        (vec!["eval", "--structure", &a, "--formula", "R(c)"], 0),
        (vec!["mean", "--structures", &a, &a, "--charge", &u], 0),
        (vec!["powermean", "--structure", &a, "--charge", &t], 0),
        (
            vec![
                "check",
                "diagonal",
                "--structure",
                &a,
                "--charge",
                &t,
                "--fragment",
                &unary,
            ],
            0,
        ),
        (
            vec![
                "check",
                "compose",
                "--structure",
                &a,
                "--mu",
                &u,
                "--nu",
                &t,
                "--fragment",
                &frag,
            ],
            0,
        ),
        (
            vec![
                "check",
                "mean",
                "--structures",
                &a,
                &p0,
                "--charge",
                &u,
                "--formula",
                "sup y. R(x) + d(x,y)",
            ],
            0,
        ),
        (
            vec!["check", "random", "--instances", "3", "--seed", "5"],
            0,
        ),
        (
            vec!["types", "realized", "--structure", &a, "--fragment", &unary],
            0,
        ),
        (
            vec!["types", "extremes", "--structure", &a, "--fragment", &unary],
            0,
        ),
        (
            vec![
                "types",
                "realize",
                "--structure",
                &a,
                "--weights",
                &t,
                "--fragment",
                &unary,
            ],
            0,
        ),
        (
            vec!["equiv", "--left", &p0, "--right", &p1, "--fragment", &frag],
            1,
        ),
        (
            vec!["equiv", "--left", &a, "--right", &a, "--fragment", &frag],
            0,
        ),
        (
            vec![
                "game",
                "--left",
                &a,
                "--right",
                &a,
                "--fragment",
                &unary,
                "--depth",
                "2",
            ],
            0,
        ),
        (
            vec![
                "game",
                "--left",
                &a,
                "--right",
                &p0,
                "--fragment",
                &unary,
                "--depth",
                "1",
            ],
            1,
        ),
        (
            vec![
                "approx",
                "fit",
                "--corpus",
                &p0,
                &p1,
                "--basis",
                "1",
                "R(c)",
                "--target",
                "min(R(c), 1 + -1*R(c))",
            ],
            0,
        ),
    ];
    for (args, want) in cases {
        let (code, _) = json(&args);
        assert_eq!(code, want, "{args:?}");
    }
}

#[test]
fn tables_without_json() {
    let (code, out, _) = call(&[
        "powermean",
        "--structure",
        &data("A.json"),
        "--charge",
        &data("uniform2.json"),
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("4"), "{out}");
}

#[test]
fn mean_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("mean.json");
    let side = dir.path().join("classes.json");
    let a = data("A.json");
    let (code, _, err) = call(&[
        "mean",
        "--structures",
        &a,
        &a,
        "--charge",
        &data("thirds.json"),
        "--out",
        base.to_str().unwrap(),
        "--sidecar",
        side.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let m = meanlogic::FiniteStructure::from_json_str(&std::fs::read_to_string(&base).unwrap())
        .unwrap();
    assert_eq!(m.size(), 4);
    let (code, _, _) = call(&["validate", "--structure", base.to_str().unwrap()]);
    assert_eq!(code, 0);
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&side).unwrap()).unwrap();
    assert!(sidecar.is_object() || sidecar.is_array());
}

#[test]
fn invalid_input_exits_two() {
    assert_eq!(call(&["--bogus"]).0, 2);
    assert_eq!(
        call(&["eval", "--structure", "/nonexistent.json", "--formula", "1"]).0,
        2
    );
    assert_eq!(
        call(&["eval", "--structure", &data("A.json"), "--formula", "R(c"]).0,
        2
    );
    assert_eq!(
        call(&["eval", "--structure", &data("A.json"), "--formula", "Q(c)"]).0,
        2
    );
    assert_eq!(
        call(&["--p", "0", "validate", "--structure", &data("A.json")]).0,
        2
    );
    let (code, _, _) = call(&[
        "check",
        "mean",
        "--structures",
        &data("A.json"),
        "--charge",
        &data("uniform2.json"),
        "--formula",
        "R(c)",
    ]);
    assert_eq!(code, 2);
    assert_eq!(call(&["--help"]).0, 0);
}

#[test]
fn seeded_runs_are_reproducible() {
    let args = [
        "--json",
        "check",
        "random",
        "--instances",
        "4",
        "--seed",
        "11",
    ];
    assert_eq!(call(&args), call(&args));
}

#[test]
fn binary_matches_library() {
    let args = [
        "--json",
        "eval",
        "--structure",
        &data("A.json"),
        "--formula",
        "inf x. R(x) + d(x,c)",
    ];
    let output = Command::new(env!("CARGO_BIN_EXE_meanlogic"))
        .args(args)
        .output()
        .unwrap();
    let (code, out, _) = call(&args);
    assert_eq!(output.status.code(), Some(code));
    assert_eq!(String::from_utf8(output.stdout).unwrap(), out);
    let bad = Command::new(env!("CARGO_BIN_EXE_meanlogic"))
        .arg("nope")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn formulas_may_start_with_minus() {
    let (code, out, _) = call(&[
        "eval",
        "--structure",
        &data("A.json"),
        "--formula",
        "-R(x)",
        "--assign",
        "x=a1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "-1");
}
