//! C ABI for the regmod core: opaque instance handles, integer status
//! codes, and JSON strings for structured results.
//!
//! Conventions:
//! * every function returns a [`RegmodStatus`]; outputs go through out
//!   pointers;
//! * strings returned through `char**` are NUL-terminated, UTF-8, owned by
//!   the library, and must be released with [`regmod_string_free`];
//! * handles must be released with [`regmod_instance_free`];
//! * `regmod_last_error` returns a thread-local message for the most recent
//!   failure on the calling thread.
//!
//! The generated header lives at `include/regmod.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use regmod::checks::EstimateBundle;
use regmod::cloud::sample_cloud;
use regmod::critical::enumerate_critical_set;
use regmod::error::Error;
use regmod::report::{self, Json};
use regmod::suite::{self, EntryConfig};

/// Status codes shared with the C side.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegmodStatus {
    RegmodOk = 0,
    /// Invalid configuration (bad JSON, unknown family, schema violation).
    RegmodErrConfig = 1,
    /// Invalid call (dimension mismatch, bad arguments, missing seed).
    RegmodErrUsage = 2,
    /// The instance family does not support the requested operation.
    RegmodErrCapability = 3,
    /// No exact subdifferential formula at the queried point.
    RegmodErrNoFormula = 4,
    /// Not enough usable samples for the requested estimate.
    RegmodErrInsufficientData = 5,
    RegmodErrNullPointer = 6,
    RegmodErrUtf8 = 7,
    /// Internal panic was caught at the boundary.
    RegmodErrInternal = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> RegmodStatus {
    match err {
        Error::Config { .. } => RegmodStatus::RegmodErrConfig,
        Error::DimensionMismatch { .. } | Error::Usage(_) | Error::WouldOverwrite(_) => {
            RegmodStatus::RegmodErrUsage
        }
        Error::Capability(_) => RegmodStatus::RegmodErrCapability,
        Error::NoExactFormula(_) => RegmodStatus::RegmodErrNoFormula,
        Error::InsufficientData(_) => RegmodStatus::RegmodErrInsufficientData,
        Error::EmptyCriticalSet | Error::Io(_) => RegmodStatus::RegmodErrInternal,
    }
}

/// Opaque instance handle.
pub struct RegmodInstance {
    inner: regmod::FunctionInstance,
}

fn guard<F: FnOnce() -> RegmodStatus>(f: F) -> RegmodStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            RegmodStatus::RegmodErrInternal
        }
    }
}

unsafe fn str_arg<'a>(ptr: *const c_char) -> Result<&'a str, RegmodStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(RegmodStatus::RegmodErrNullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        RegmodStatus::RegmodErrUtf8
    })
}

fn return_string(out: *mut *mut c_char, text: String) -> RegmodStatus {
    let c = match CString::new(text) {
        Ok(c) => c,
        Err(_) => {
            set_error("result contained an interior NUL");
            return RegmodStatus::RegmodErrInternal;
        }
    };
    unsafe { *out = c.into_raw() };
    RegmodStatus::RegmodOk
}

/// Message for the most recent error on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn regmod_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn regmod_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Load an instance from a catalog name.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn regmod_instance_by_name(
    name: *const c_char,
    out: *mut *mut RegmodInstance,
) -> RegmodStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return RegmodStatus::RegmodErrNullPointer;
        }
        let name = match str_arg(name) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match regmod::catalog::builtin(name) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(RegmodInstance { inner }));
                RegmodStatus::RegmodOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Load an instance from a JSON record (same schema as the catalog files).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn regmod_instance_from_json(
    json: *const c_char,
    out: *mut *mut RegmodInstance,
) -> RegmodStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return RegmodStatus::RegmodErrNullPointer;
        }
        let text = match str_arg(json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match regmod::catalog::load_json(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(RegmodInstance { inner }));
                RegmodStatus::RegmodOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `instance` must come from a load call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn regmod_instance_free(instance: *mut RegmodInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Dimension `p` of the instance; 0 on a null handle.
///
/// # Safety
/// `instance` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn regmod_instance_dimension(instance: *const RegmodInstance) -> usize {
    if instance.is_null() {
        return 0;
    }
    (*instance).inner.dimension
}

unsafe fn point_arg<'a>(
    instance: &regmod::FunctionInstance,
    x: *const f64,
    len: usize,
) -> Result<&'a [f64], RegmodStatus> {
    if x.is_null() {
        set_error("null point argument");
        return Err(RegmodStatus::RegmodErrNullPointer);
    }
    if len != instance.dimension {
        set_error(&format!(
            "dimension mismatch: expected {}, got {len}",
            instance.dimension
        ));
        return Err(RegmodStatus::RegmodErrUsage);
    }
    Ok(std::slice::from_raw_parts(x, len))
}

unsafe fn scalar_oracle(
    instance: *const RegmodInstance,
    x: *const f64,
    len: usize,
    out: *mut f64,
    call: fn(&regmod::FunctionInstance, &[f64]) -> regmod::Result<f64>,
) -> RegmodStatus {
    guard(|| {
        if instance.is_null() || out.is_null() {
            set_error("null pointer");
            return RegmodStatus::RegmodErrNullPointer;
        }
        let inst = &(*instance).inner;
        let x = match point_arg(inst, x, len) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match call(inst, x) {
            Ok(v) => {
                *out = v;
                RegmodStatus::RegmodOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// `f(x)`; `+∞` is returned as `INFINITY`.
///
/// # Safety
/// `instance` must be a live handle, `x` must point to `len` doubles, and
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn regmod_evaluate(
    instance: *const RegmodInstance,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> RegmodStatus {
    scalar_oracle(instance, x, len, out, |inst, x| {
        inst.evaluate(x).map(|v| v.value())
    })
}

/// Exact `dist(0, ∂f(x))`. Points without an exact formula produce
/// `REGMOD_ERR_NO_FORMULA`, never a silent zero.
///
/// # Safety
/// `instance` must be a live handle, `x` must point to `len` doubles, and
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn regmod_subdiff_distance(
    instance: *const RegmodInstance,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> RegmodStatus {
    scalar_oracle(instance, x, len, out, |inst, x| inst.subdiff_distance(x))
}

/// `‖prox_h(x − ∇g(x)) − x‖`, the unit-step proximal-gradient residual.
///
/// # Safety
/// `instance` must be a live handle, `x` must point to `len` doubles, and
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn regmod_residual_norm(
    instance: *const RegmodInstance,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> RegmodStatus {
    scalar_oracle(instance, x, len, out, |inst, x| {
        regmod::prox::residual_map(inst, x).map(|r| regmod::linalg::norm(&r))
    })
}

/// Exact `dist(x, crit f)` against the enumerated critical set.
///
/// # Safety
/// `instance` must be a live handle, `x` must point to `len` doubles, and
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn regmod_critical_distance(
    instance: *const RegmodInstance,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> RegmodStatus {
    scalar_oracle(instance, x, len, out, |inst, x| {
        enumerate_critical_set(inst).and_then(|cs| cs.distance(x))
    })
}

/// `∇g(x)` written into `out[0..len]`.
///
/// # Safety
/// `instance` must be a live handle; `x` and `out` must point to `len`
/// doubles each.
#[no_mangle]
pub unsafe extern "C" fn regmod_smooth_gradient(
    instance: *const RegmodInstance,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> RegmodStatus {
    guard(|| {
        if instance.is_null() || out.is_null() {
            set_error("null pointer");
            return RegmodStatus::RegmodErrNullPointer;
        }
        let inst = &(*instance).inner;
        let x = match point_arg(inst, x, len) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match inst.smooth_gradient(x) {
            Ok(g) => {
                std::slice::from_raw_parts_mut(out, len).copy_from_slice(&g);
                RegmodStatus::RegmodOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Sample a cloud around `base` and estimate every modulus; the result is
/// the same JSON object the CLI `estimate` subcommand prints.
///
/// # Safety
/// `instance` must be a live handle; `base` and `radii` must point to the
/// given counts of doubles; `out_json` must be valid.
#[no_mangle]
pub unsafe extern "C" fn regmod_estimate_json(
    instance: *const RegmodInstance,
    base: *const f64,
    base_len: usize,
    radii: *const f64,
    radii_len: usize,
    samples_per_radius: u32,
    seed: u64,
    out_json: *mut *mut c_char,
) -> RegmodStatus {
    guard(|| {
        if instance.is_null() || out_json.is_null() {
            set_error("null pointer");
            return RegmodStatus::RegmodErrNullPointer;
        }
        let inst = &(*instance).inner;
        let base = match point_arg(inst, base, base_len) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if radii.is_null() || radii_len == 0 {
            set_error("null or empty radius schedule");
            return RegmodStatus::RegmodErrNullPointer;
        }
        let radii = std::slice::from_raw_parts(radii, radii_len);

        let result = (|| -> regmod::Result<String> {
            let cs = enumerate_critical_set(inst)?;
            let cloud =
                sample_cloud(inst, &cs, base, radii, samples_per_radius as usize, seed)?;
            let estimates = EstimateBundle::compute(&cloud)?;
            let mut root = Json::object();
            root.push("instance", Json::Str(inst.name.clone()));
            root.push("base", Json::floats(base));
            root.push("seed", Json::Int(seed as i64));
            root.push("radii", Json::floats(radii));
            root.push("samples_per_radius", Json::Int(samples_per_radius as i64));
            root.push("base_value", Json::Float(cloud.base_value));
            let mut est = Json::object();
            est.push(
                "kl",
                estimates.kl.as_ref().map_or(Json::Null, report::modulus_json),
            );
            est.push(
                "subregularity",
                report::modulus_json(&estimates.subregularity),
            );
            est.push(
                "quadratic_growth",
                report::modulus_json(&estimates.quadratic_growth),
            );
            est.push(
                "luo_tseng",
                estimates
                    .luo_tseng
                    .as_ref()
                    .map_or(Json::Null, report::modulus_json),
            );
            root.push("estimates", est);
            Ok(root.render())
        })();
        match result {
            Ok(text) => return_string(out_json, text),
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Full check pipeline (cloud, estimators, prox-regularity, implication
/// checks); the result is the CLI `check` report JSON. `out_all_passed`
/// receives 1 iff every non-skipped check held. Pass null/0 for `base`
/// and `radii` to take the instance defaults.
///
/// # Safety
/// `instance_name` must be NUL-terminated; `base`/`radii` must point to the
/// given counts of doubles when non-null; `out_json` must be valid.
#[no_mangle]
pub unsafe extern "C" fn regmod_check_json(
    instance_name: *const c_char,
    base: *const f64,
    base_len: usize,
    radii: *const f64,
    radii_len: usize,
    samples_per_radius: u32,
    seed: u64,
    tol: f64,
    out_json: *mut *mut c_char,
    out_all_passed: *mut i32,
) -> RegmodStatus {
    guard(|| {
        if out_json.is_null() {
            set_error("null output pointer");
            return RegmodStatus::RegmodErrNullPointer;
        }
        let name = match str_arg(instance_name) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let mut entry = EntryConfig::new(name);
        if !base.is_null() && base_len > 0 {
            entry.base = suite::BaseSelector::Point(
                std::slice::from_raw_parts(base, base_len).to_vec(),
            );
        }
        if !radii.is_null() && radii_len > 0 {
            entry.radii = std::slice::from_raw_parts(radii, radii_len).to_vec();
        }
        entry.samples_per_radius = samples_per_radius as usize;
        match suite::run_entry(&entry, seed, tol) {
            Ok(outcome) => {
                if !out_all_passed.is_null() {
                    *out_all_passed = outcome.passed as i32;
                }
                return_string(out_json, outcome.report_json)
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Names of the built-in catalog instances as a JSON array.
///
/// # Safety
/// `out_json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn regmod_catalog_json(out_json: *mut *mut c_char) -> RegmodStatus {
    guard(|| {
        if out_json.is_null() {
            set_error("null output pointer");
            return RegmodStatus::RegmodErrNullPointer;
        }
        let names = Json::Array(
            regmod::catalog::builtin_names()
                .into_iter()
                .map(|n| Json::Str(n.to_string()))
                .collect(),
        );
        return_string(out_json, names.render())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    unsafe fn load(name: &str) -> *mut RegmodInstance {
        let cname = CString::new(name).unwrap();
        let mut handle: *mut RegmodInstance = ptr::null_mut();
        let status = regmod_instance_by_name(cname.as_ptr(), &mut handle);
        assert_eq!(status, RegmodStatus::RegmodOk);
        handle
    }

    #[test]
    fn evaluate_through_the_abi() {
        unsafe {
            let h = load("zq3");
            assert_eq!(regmod_instance_dimension(h), 3);
            let x = [1.1, 0.9, 0.0];
            let mut v = 0.0;
            assert_eq!(regmod_evaluate(h, x.as_ptr(), 3, &mut v), RegmodStatus::RegmodOk);
            assert!((v - 0.02).abs() < 1e-12);
            let off = [1.0, 1.0, 1.0];
            assert_eq!(regmod_evaluate(h, off.as_ptr(), 3, &mut v), RegmodStatus::RegmodOk);
            assert!(v.is_infinite());
            regmod_instance_free(h);
        }
    }

    #[test]
    fn no_formula_is_a_distinct_status() {
        unsafe {
            let h = load("zq3");
            let x = [1.0, 0.0, 0.0];
            let mut d = 0.0;
            let status = regmod_subdiff_distance(h, x.as_ptr(), 3, &mut d);
            assert_eq!(status, RegmodStatus::RegmodErrNoFormula);
            let msg = CStr::from_ptr(regmod_last_error()).to_str().unwrap();
            assert!(msg.contains("partial support"), "{msg}");
            regmod_instance_free(h);
        }
    }

    #[test]
    fn dimension_mismatch_is_usage() {
        unsafe {
            let h = load("zq3");
            let x = [1.0];
            let mut v = 0.0;
            assert_eq!(
                regmod_evaluate(h, x.as_ptr(), 1, &mut v),
                RegmodStatus::RegmodErrUsage
            );
            regmod_instance_free(h);
        }
    }

    #[test]
    fn unknown_name_reports_config_error() {
        unsafe {
            let cname = CString::new("nope").unwrap();
            let mut handle: *mut RegmodInstance = ptr::null_mut();
            assert_eq!(
                regmod_instance_by_name(cname.as_ptr(), &mut handle),
                RegmodStatus::RegmodErrConfig
            );
            assert!(handle.is_null());
        }
    }

    #[test]
    fn estimate_json_round_trips() {
        unsafe {
            let h = load("zq3");
            let base = [1.0, 1.0, 0.0];
            let radii = [0.2, 0.1, 0.05];
            let mut out: *mut c_char = ptr::null_mut();
            let status =
                regmod_estimate_json(h, base.as_ptr(), 3, radii.as_ptr(), 3, 128, 7, &mut out);
            assert_eq!(status, RegmodStatus::RegmodOk);
            let text = CStr::from_ptr(out).to_str().unwrap().to_string();
            regmod_string_free(out);
            regmod_instance_free(h);
            let v: serde_json::Value = serde_json::from_str(&text).unwrap();
            let kappa = v["estimates"]["subregularity"]["value"].as_f64().unwrap();
            assert!((kappa - 0.5).abs() < 0.01);
        }
    }

    #[test]
    fn check_json_reports_pass() {
        unsafe {
            let name = CString::new("lasso-toy").unwrap();
            let mut out: *mut c_char = ptr::null_mut();
            let mut passed = 0i32;
            let status = regmod_check_json(
                name.as_ptr(),
                ptr::null(),
                0,
                ptr::null(),
                0,
                128,
                7,
                0.05,
                &mut out,
                &mut passed,
            );
            assert_eq!(status, RegmodStatus::RegmodOk);
            assert_eq!(passed, 1);
            let text = CStr::from_ptr(out).to_str().unwrap().to_string();
            regmod_string_free(out);
            regmod::report::validate_report_schema(&text).unwrap();
        }
    }

    #[test]
    fn catalog_json_lists_builtins() {
        unsafe {
            let mut out: *mut c_char = ptr::null_mut();
            assert_eq!(regmod_catalog_json(&mut out), RegmodStatus::RegmodOk);
            let text = CStr::from_ptr(out).to_str().unwrap().to_string();
            regmod_string_free(out);
            assert!(text.contains("zq3") && text.contains("quartic-gap"));
        }
    }
}
