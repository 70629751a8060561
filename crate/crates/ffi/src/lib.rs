//! C ABI for the `subpoisson` crate.
//!
//! Every fallible function returns an [`SpStatus`] and writes its result
//! through an out-pointer. On failure a message is kept per thread and can be
//! read with [`sp_last_error`]. Distributions are passed as opaque
//! [`SpDistribution`] handles created by [`sp_distribution_parse`] and
//! released with [`sp_distribution_free`]. Strings returned by the library
//! must be released with [`sp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use subpoisson::bounds::{bound, BoundKind};
use subpoisson::orlicz::psi_norm;
use subpoisson::proxy::optimal_proxy;
use subpoisson::special::{h_inverse, lambert_w0, phi};
use subpoisson::{Distribution, Error, Side, SolverOptions};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Argument = 3,
    Range = 4,
    Parse = 5,
    NotANumber = 6,
    Unsupported = 7,
    Io = 8,
    InvalidUtf8 = 9,
    Panic = 10,
}

pub const SP_SIDE_UPPER: i32 = 0;
pub const SP_SIDE_LOWER: i32 = 1;
pub const SP_SIDE_TWO_SIDED: i32 = 2;

pub const SP_BOUND_BENNETT: i32 = 0;
pub const SP_BOUND_BERNSTEIN1: i32 = 1;
pub const SP_BOUND_BERNSTEIN2: i32 = 2;

/// Opaque handle to a parsed distribution.
pub struct SpDistribution(Distribution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SpStatus {
    match e {
        Error::Domain { .. } => SpStatus::Domain,
        Error::Argument(_) => SpStatus::Argument,
        Error::Range { .. } => SpStatus::Range,
        Error::Parse { .. } => SpStatus::Parse,
        Error::NotANumber(_) => SpStatus::NotANumber,
        Error::Unsupported(_) => SpStatus::Unsupported,
        Error::Io(_) => SpStatus::Io,
    }
}

/// Runs `f`, stores its value in `out`, and maps errors and panics to codes.
fn guarded<T>(out: *mut T, f: impl FnOnce() -> Result<T, (SpStatus, String)>) -> SpStatus {
    if out.is_null() {
        set_error("output pointer is null".into());
        return SpStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            unsafe { out.write(v) };
            SpStatus::Ok
        }
        Ok(Err((code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            SpStatus::Panic
        }
    }
}

fn lib<T>(r: subpoisson::Result<T>) -> Result<T, (SpStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn side_of(side: i32) -> Result<Side, (SpStatus, String)> {
    match side {
        SP_SIDE_UPPER => Ok(Side::Upper),
        SP_SIDE_LOWER => Ok(Side::Lower),
        SP_SIDE_TWO_SIDED => Ok(Side::TwoSided),
        s => Err((SpStatus::Argument, format!("unknown side code {s}"))),
    }
}

fn kind_of(kind: i32) -> Result<BoundKind, (SpStatus, String)> {
    match kind {
        SP_BOUND_BENNETT => Ok(BoundKind::Bennett),
        SP_BOUND_BERNSTEIN1 => Ok(BoundKind::Bernstein1),
        SP_BOUND_BERNSTEIN2 => Ok(BoundKind::Bernstein2),
        k => Err((SpStatus::Argument, format!("unknown bound kind code {k}"))),
    }
}

fn handle<'a>(d: *const SpDistribution) -> Result<&'a Distribution, (SpStatus, String)> {
    if d.is_null() {
        return Err((SpStatus::NullPointer, "distribution handle is null".into()));
    }
    Ok(unsafe { &(*d).0 })
}

/// Message for the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// `phi(x) = e^x - 1 - x`.
#[no_mangle]
pub extern "C" fn sp_phi(x: f64, out: *mut f64) -> SpStatus {
    guarded(out, || lib(phi(x)))
}

/// Principal branch of Lambert W on `[0, inf]`.
#[no_mangle]
pub extern "C" fn sp_lambert_w0(x: f64, out: *mut f64) -> SpStatus {
    guarded(out, || lib(lambert_w0(x)))
}

/// Inverse of `h(u) = (1 + u) log(1 + u) - u`.
#[no_mangle]
pub extern "C" fn sp_h_inverse(y: f64, out: *mut f64) -> SpStatus {
    guarded(out, || lib(h_inverse(y)))
}

/// One-sided tail bound of kind `SP_BOUND_*` for proxy `sigma2` at `t`.
#[no_mangle]
pub extern "C" fn sp_bound(kind: i32, sigma2: f64, t: f64, out: *mut f64) -> SpStatus {
    guarded(out, || lib(bound(kind_of(kind)?, sigma2, t)))
}

/// Parses a distribution descriptor such as `poisson(2)`.
///
/// # Safety
/// `descriptor` must be null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sp_distribution_parse(
    descriptor: *const c_char,
    out: *mut *mut SpDistribution,
) -> SpStatus {
    guarded(out, || {
        if descriptor.is_null() {
            return Err((SpStatus::NullPointer, "descriptor is null".into()));
        }
        let text = unsafe { CStr::from_ptr(descriptor) }
            .to_str()
            .map_err(|e| (SpStatus::InvalidUtf8, e.to_string()))?;
        let d = lib(Distribution::parse(text))?;
        Ok(Box::into_raw(Box::new(SpDistribution(d))))
    })
}

/// Releases a handle from [`sp_distribution_parse`]. Null is ignored.
///
/// # Safety
/// `d` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_distribution_free(d: *mut SpDistribution) {
    if !d.is_null() {
        drop(unsafe { Box::from_raw(d) });
    }
}

/// Mean and variance.
///
/// # Safety
/// `d` must be a live handle; `mean` and `variance` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_distribution_moments(
    d: *const SpDistribution,
    mean: *mut f64,
    variance: *mut f64,
) -> SpStatus {
    if variance.is_null() {
        set_error("output pointer is null".into());
        return SpStatus::NullPointer;
    }
    guarded(mean, || {
        let (m, v) = handle(d)?.moments();
        unsafe { variance.write(v) };
        Ok(m)
    })
}

/// Optimal variance proxy on side `SP_SIDE_*`; `+inf` when none exists.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_optimal_proxy(d: *const SpDistribution, side: i32, out: *mut f64) -> SpStatus {
    guarded(out, || {
        let r = lib(optimal_proxy(handle(d)?, side_of(side)?, &SolverOptions::default()))?;
        Ok(r.value.value())
    })
}

/// Orlicz norm `psi_p` of `X - E X`; `+inf` when it does not exist.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_psi_norm(d: *const SpDistribution, p: f64, out: *mut f64) -> SpStatus {
    guarded(out, || Ok(lib(psi_norm(handle(d)?, p))?.value.value()))
}

/// Full solver result as a JSON object. Free the string with
/// [`sp_string_free`].
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_proxy_json(d: *const SpDistribution, side: i32, out: *mut *mut c_char) -> SpStatus {
    guarded(out, || {
        let r = lib(optimal_proxy(handle(d)?, side_of(side)?, &SolverOptions::default()))?;
        let text = serde_json::to_string(&r).map_err(|e| (SpStatus::Argument, e.to_string()))?;
        Ok(CString::new(text).expect("JSON has no NUL").into_raw())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
