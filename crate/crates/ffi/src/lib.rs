//! C ABI over `ncm-core`.
//!
//! Models are handed out as opaque `NcmModel` pointers and released with
//! [`ncm_model_free`]. Every fallible call returns an `NcmStatus`; on failure
//! the message is available from [`ncm_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use ncm_core::{ConvexModel, Error};

/// Opaque model handle.
pub struct NcmModel {
    inner: ConvexModel,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcmStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Input = 4,
    DimensionMismatch = 5,
    NotPositiveDefinite = 6,
    Numeric = 7,
    Io = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: &Error) -> NcmStatus {
    set_error(e.to_string());
    match e {
        Error::Parse { .. } | Error::Syntax { .. } | Error::UnknownCharacter { .. } => NcmStatus::Parse,
        Error::DimensionMismatch { .. } => NcmStatus::DimensionMismatch,
        Error::NotPositiveDefinite { .. } => NcmStatus::NotPositiveDefinite,
        Error::SingularShape { .. }
        | Error::InfeasibleFit { .. }
        | Error::NoSurfaceFound { .. }
        | Error::MidpointOnSurface => NcmStatus::Numeric,
        Error::Io(_) => NcmStatus::Io,
        _ => NcmStatus::Input,
    }
}

fn null(what: &str) -> NcmStatus {
    set_error(format!("`{what}` is null"));
    NcmStatus::NullArgument
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, NcmStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("`{what}` is not valid UTF-8"));
        NcmStatus::InvalidUtf8
    })
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ncm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a model file's text into a new handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ncm_model_from_toml(text: *const c_char, out: *mut *mut NcmModel) -> NcmStatus {
    if out.is_null() {
        return null("out");
    }
    let text = match str_arg(text, "text") {
        Ok(t) => t,
        Err(s) => return s,
    };
    match ConvexModel::from_toml(text) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(NcmModel { inner: m }));
            NcmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Loads a model file from disk.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ncm_model_load(path: *const c_char, out: *mut *mut NcmModel) -> NcmStatus {
    if out.is_null() {
        return null("out");
    }
    let path = match str_arg(path, "path") {
        Ok(p) => p,
        Err(s) => return s,
    };
    match ConvexModel::read(path) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(NcmModel { inner: m }));
            NcmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Builds a model from samples and intervals given as CSV text.
///
/// `variant` is one of `me`, `mp1`, `mp2`, `rect`, `ltri`, `utri`; `method`
/// is `ccc` or `scc`; `repair` non-zero repairs an indefinite matrix.
///
/// # Safety
/// All strings must be NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ncm_model_build(
    samples_csv: *const c_char,
    intervals_csv: *const c_char,
    variant: *const c_char,
    method: *const c_char,
    repair: i32,
    out: *mut *mut NcmModel,
) -> NcmStatus {
    if out.is_null() {
        return null("out");
    }
    let args = (|| -> Result<_, NcmStatus> {
        Ok((
            str_arg(samples_csv, "samples_csv")?,
            str_arg(intervals_csv, "intervals_csv")?,
            str_arg(variant, "variant")?,
            str_arg(method, "method")?,
        ))
    })();
    let (samples, intervals, variant, method) = match args {
        Ok(a) => a,
        Err(s) => return s,
    };
    let result = (|| -> Result<ConvexModel, Error> {
        let spec = ncm_core::MarginalSpec::parse_intervals(intervals)?;
        let samples = ncm_core::SampleSet::parse_csv(samples)?;
        let policy = if repair != 0 { ncm_core::PdPolicy::Repair } else { ncm_core::PdPolicy::Strict };
        ncm_core::construct(&spec, &samples, variant.parse()?, method.parse()?, policy)
            .map(|c| c.model)
            .map_err(|f| f.error)
    })();
    match result {
        Ok(m) => {
            *out = Box::into_raw(Box::new(NcmModel { inner: m }));
            NcmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ncm_model_free(model: *mut NcmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of variables.
///
/// # Safety
/// `model` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn ncm_model_dim(model: *const NcmModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.dim())
}

/// Membership of a physical point. `inside` receives 1 or 0 and `slack`
/// (optional) the value of the defining inequality.
///
/// # Safety
/// `x` must point to `len` doubles; `inside` must be valid; `slack` may be null.
#[no_mangle]
pub unsafe extern "C" fn ncm_model_contains(
    model: *const NcmModel,
    x: *const f64,
    len: usize,
    inside: *mut i32,
    slack: *mut f64,
) -> NcmStatus {
    let Some(m) = model.as_ref() else { return null("model") };
    if x.is_null() {
        return null("x");
    }
    if inside.is_null() {
        return null("inside");
    }
    let point = nalgebra::DVector::from_column_slice(std::slice::from_raw_parts(x, len));
    match m.inner.contains(&point) {
        Ok(r) => {
            *inside = r.inside as i32;
            if !slack.is_null() {
                *slack = r.slack;
            }
            NcmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Volume ratio and standard volume ratio.
///
/// # Safety
/// `nu` and `nu_bar` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ncm_model_volume_ratio(model: *const NcmModel, nu: *mut f64, nu_bar: *mut f64) -> NcmStatus {
    let Some(m) = model.as_ref() else { return null("model") };
    if nu.is_null() || nu_bar.is_null() {
        return null("nu");
    }
    let (a, b) = m.inner.volume_ratio();
    *nu = a;
    *nu_bar = b;
    NcmStatus::Ok
}

/// Model file text for a handle. Free the result with [`ncm_string_free`].
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ncm_model_to_toml(model: *const NcmModel) -> *mut c_char {
    match model.as_ref() {
        Some(m) => CString::new(m.inner.to_toml()).map_or(ptr::null_mut(), CString::into_raw),
        None => {
            null("model");
            ptr::null_mut()
        }
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ncm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Reliability index of the limit state `expr`, with the model's own norm.
/// `names`/`values` bind `n_bindings` extra constants.
///
/// # Safety
/// `expr` must be NUL-terminated; `names` and `values` must hold
/// `n_bindings` entries; `eta` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ncm_reliability_index(
    model: *const NcmModel,
    expr: *const c_char,
    names: *const *const c_char,
    values: *const f64,
    n_bindings: usize,
    eta: *mut f64,
) -> NcmStatus {
    let Some(m) = model.as_ref() else { return null("model") };
    if eta.is_null() {
        return null("eta");
    }
    let expr = match str_arg(expr, "expr") {
        Ok(e) => e,
        Err(s) => return s,
    };
    let mut options = ncm_core::ReliabilityOptions::default();
    if n_bindings > 0 {
        if names.is_null() || values.is_null() {
            return null("names");
        }
        for k in 0..n_bindings {
            let name = match str_arg(*names.add(k), "names[k]") {
                Ok(n) => n,
                Err(s) => return s,
            };
            options.bindings.insert(name.to_string(), *values.add(k));
        }
    }
    let result = ncm_core::LimitState::parse(expr).and_then(|g| ncm_core::reliability_index(&m.inner, &g, &options));
    match result {
        Ok(r) => {
            *eta = r.eta;
            NcmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}
