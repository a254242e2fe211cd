//! C ABI for `meanlogic`.
//!
//! Objects are opaque handles created by `ml_*_from_*`/`ml_*_parse` and
//! released with the matching `ml_*_free`. Every fallible call returns an
//! [`MlStatus`]; on failure `ml_last_error` describes the error for the
//! calling thread. Strings returned through `char **` are owned by the
//! caller and must be released with `ml_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use meanlogic::formula::{eval, Assignment};
use meanlogic::mean::{cap_from_env, powermean, ultramean, MeanOptions};
use meanlogic::structure::validate_structure;
use meanlogic::{Charge, Error, FiniteStructure, Formula, MeanStructure, PNorm};

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Domain = 4,
    Signature = 5,
    Structural = 6,
    CapExceeded = 7,
    NotLinear = 8,
    Inexact = 9,
    Unassigned = 10,
    Json = 11,
    Internal = 12,
    Panic = 13,
}

pub struct MlStructure(FiniteStructure);
pub struct MlFormula(Formula);
pub struct MlCharge(Charge);
pub struct MlMean(MeanStructure);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MlStatus {
    match e {
        Error::Domain(_) => MlStatus::Domain,
        Error::Parse { .. } => MlStatus::Parse,
        Error::Structural(_) => MlStatus::Structural,
        Error::Signature(_) => MlStatus::Signature,
        Error::UnassignedVariable(_) => MlStatus::Unassigned,
        Error::CapExceeded { .. } => MlStatus::CapExceeded,
        Error::NotLinear { .. } => MlStatus::NotLinear,
        Error::Inexact(_) => MlStatus::Inexact,
        Error::Json(_) => MlStatus::Json,
        Error::Io(_) | Error::Internal(_) => MlStatus::Internal,
    }
}

enum Fail {
    Status(MlStatus, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MlStatus::Ok,
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            MlStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(MlStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Status(MlStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = CString::new(s).expect("no interior nul").into_raw();
    Ok(())
}

fn options(p: u32) -> Result<MeanOptions, Fail> {
    Ok(MeanOptions {
        p: PNorm::new(p)?,
        cap: cap_from_env(),
    })
}

/// Message of the last failed call on this thread, or NULL. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn ml_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ml_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a structure from its JSON document.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_structure_from_json(
    json: *const c_char,
    out: *mut *mut MlStructure,
) -> MlStatus {
    guard(|| {
        let s = FiniteStructure::from_json_str(text(json, "json")?)?;
        put(out, MlStructure(s))
    })
}

/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_structure_to_json(
    s: *const MlStructure,
    out: *mut *mut c_char,
) -> MlStatus {
    guard(|| {
        let s = get(s, "structure")?;
        put_string(out, s.0.to_json().to_string())
    })
}

/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_structure_size(s: *const MlStructure, out: *mut usize) -> MlStatus {
    guard(|| {
        let s = get(s, "structure")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = s.0.size();
        Ok(())
    })
}

/// Validates against the metric axioms and the signature's bounds and moduli.
/// `*valid` receives the verdict and `*report` (if not NULL) the JSON violation list.
///
/// # Safety
/// `s` must be a live handle; `valid` must be writable; `report` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn ml_structure_validate(
    s: *const MlStructure,
    p: u32,
    valid: *mut bool,
    report: *mut *mut c_char,
) -> MlStatus {
    guard(|| {
        let s = get(s, "structure")?;
        if valid.is_null() {
            return Err(null("valid"));
        }
        let r = validate_structure(&s.0, PNorm::new(p)?);
        *valid = r.is_valid();
        if !report.is_null() {
            put_string(
                report,
                serde_json::to_string(&r.violations).map_err(Error::from)?,
            )?;
        }
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ml_structure_free(s: *mut MlStructure) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Parses a formula over the signature of `s`.
///
/// # Safety
/// `text` must be nul-terminated; `s` a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_formula_parse(
    formula: *const c_char,
    s: *const MlStructure,
    out: *mut *mut MlFormula,
) -> MlStatus {
    guard(|| {
        let s = get(s, "structure")?;
        let f = meanlogic::formula::parse(text(formula, "formula")?, s.0.signature())?;
        put(out, MlFormula(f))
    })
}

/// Writes the canonical printed form of the formula.
///
/// # Safety
/// `f` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_formula_to_string(
    f: *const MlFormula,
    out: *mut *mut c_char,
) -> MlStatus {
    guard(|| {
        let f = get(f, "formula")?;
        put_string(out, f.0.to_string())
    })
}

/// # Safety
/// `f` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_formula_is_linear(
    f: *const MlFormula,
    p: u32,
    out: *mut bool,
) -> MlStatus {
    guard(|| {
        let f = get(f, "formula")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = f.0.is_linear(PNorm::new(p)?);
        Ok(())
    })
}

/// # Safety
/// `f` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ml_formula_free(f: *mut MlFormula) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Evaluates exactly; `*out` receives the value as a `p/q` string.
/// `assignment` is NULL for sentences or a JSON object mapping variables to element names.
///
/// # Safety
/// `f` and `s` must be live handles; `assignment` NULL or nul-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_eval(
    f: *const MlFormula,
    s: *const MlStructure,
    assignment: *const c_char,
    out: *mut *mut c_char,
) -> MlStatus {
    guard(|| {
        let (f, s) = (get(f, "formula")?, get(s, "structure")?);
        let mut asg = Assignment::new();
        if !assignment.is_null() {
            let map: std::collections::BTreeMap<String, String> =
                serde_json::from_str(text(assignment, "assignment")?).map_err(Error::from)?;
            for (var, elem) in map {
                let e =
                    s.0.element_index(&elem)
                        .ok_or_else(|| Error::Domain(format!("unknown element `{elem}`")))?;
                asg.insert(var, e);
            }
        }
        let v = eval(&f.0, &s.0, &asg)?;
        put_string(out, meanlogic::rational::format(&v))
    })
}

/// Parses a charge from `{"index": [...], "weights": [...]}`.
///
/// # Safety
/// `json` must be nul-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_charge_from_json(
    json: *const c_char,
    out: *mut *mut MlCharge,
) -> MlStatus {
    guard(|| {
        let c = Charge::from_json_str(text(json, "json")?)?;
        put(out, MlCharge(c))
    })
}

/// # Safety
/// `c` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ml_charge_free(c: *mut MlCharge) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Builds the powermean `s^charge` for the p-norm `p`.
///
/// # Safety
/// `s` and `charge` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_powermean(
    s: *const MlStructure,
    charge: *const MlCharge,
    p: u32,
    out: *mut *mut MlMean,
) -> MlStatus {
    guard(|| {
        let (s, c) = (get(s, "structure")?, get(charge, "charge")?);
        let m = powermean(&s.0, c.0.clone(), options(p)?)?;
        put(out, MlMean(m))
    })
}

/// Builds the ultramean of `count` factors.
///
/// # Safety
/// `factors` must point to `count` live handles; `charge` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_ultramean(
    factors: *const *const MlStructure,
    count: usize,
    charge: *const MlCharge,
    p: u32,
    out: *mut *mut MlMean,
) -> MlStatus {
    guard(|| {
        if factors.is_null() {
            return Err(null("factors"));
        }
        let handles = std::slice::from_raw_parts(factors, count);
        let fs = handles
            .iter()
            .map(|&h| get(h, "factor").map(|s| s.0.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let c = get(charge, "charge")?;
        let m = ultramean(fs, c.0.clone(), options(p)?)?;
        put(out, MlMean(m))
    })
}

/// # Safety
/// `m` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_mean_class_count(m: *const MlMean, out: *mut usize) -> MlStatus {
    guard(|| {
        let m = get(m, "mean")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = m.0.class_count();
        Ok(())
    })
}

/// A new structure handle holding a copy of the mean's base structure.
///
/// # Safety
/// `m` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_mean_base(m: *const MlMean, out: *mut *mut MlStructure) -> MlStatus {
    guard(|| {
        let m = get(m, "mean")?;
        put(out, MlStructure(m.0.base().clone()))
    })
}

/// The class sidecar `{"classes": ..., "charge": ..., "p": k}` as JSON.
///
/// # Safety
/// `m` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_mean_sidecar_json(m: *const MlMean, out: *mut *mut c_char) -> MlStatus {
    guard(|| {
        let m = get(m, "mean")?;
        put_string(out, m.0.sidecar_json().to_string())
    })
}

/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ml_mean_free(m: *mut MlMean) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}
