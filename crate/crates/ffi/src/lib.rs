//! C ABI for punctlab.
//!
//! Every fallible call returns a [`PlStatus`]; on failure a message is
//! available from [`pl_last_error`] on the same thread. Expressions live
//! behind an opaque [`PlExpr`] handle. Analyses that produce structured
//! records return a JSON string that must be released with
//! [`pl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use punctlab::lipschitz::{lipschitz_estimate, marty_test, MartyConfig};
use punctlab::maps::Bound;
use punctlab::metrics::{self, Disk};
use punctlab::singularity::{julia_indicator, lv_witness, rescaling_principle, GrowthConfig, LvConfig, PrincipleConfig};
use punctlab::{Error, HoloExpr, SpherePoint};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    UnknownIdentifier = 4,
    Indeterminate = 5,
    Essential = 6,
    MissingParameter = 7,
    OutsideDomain = 8,
    InvalidArgument = 9,
    Numerical = 10,
    Panic = 11,
}

/// A complex number.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlComplex {
    pub re: f64,
    pub im: f64,
}

/// A point of the Riemann sphere; `value` is ignored when `infinite` is set.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlSpherePoint {
    pub infinite: bool,
    pub value: PlComplex,
}

/// Opaque parsed expression.
pub struct PlExpr(HoloExpr);

impl From<PlComplex> for Complex64 {
    fn from(c: PlComplex) -> Self {
        Complex64::new(c.re, c.im)
    }
}

impl From<PlSpherePoint> for SpherePoint {
    fn from(p: PlSpherePoint) -> Self {
        if p.infinite {
            SpherePoint::Infinity
        } else {
            SpherePoint::Finite(p.value.into())
        }
    }
}

impl From<SpherePoint> for PlSpherePoint {
    fn from(p: SpherePoint) -> Self {
        match p {
            SpherePoint::Infinity => PlSpherePoint { infinite: true, value: PlComplex { re: 0.0, im: 0.0 } },
            SpherePoint::Finite(c) => PlSpherePoint { infinite: false, value: PlComplex { re: c.re, im: c.im } },
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PlStatus {
    match e {
        Error::Syntax { .. } => PlStatus::Syntax,
        Error::UnknownIdentifier { .. } => PlStatus::UnknownIdentifier,
        Error::Indeterminate { .. } => PlStatus::Indeterminate,
        Error::Essential { .. } => PlStatus::Essential,
        Error::MissingParameter => PlStatus::MissingParameter,
        Error::OutsideDomain { .. } => PlStatus::OutsideDomain,
        Error::InvalidArgument(_) | Error::NotBiholomorphic { .. } => PlStatus::InvalidArgument,
        _ => PlStatus::Numerical,
    }
}

struct Fail(PlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Run `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> PlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => PlStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PlStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(PlStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    // SAFETY: caller passes either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| null(what))
}

unsafe fn expr_ref<'a>(h: *const PlExpr) -> Result<&'a HoloExpr, Fail> {
    // SAFETY: caller passes either null or a live handle from `pl_expr_parse`.
    unsafe { h.as_ref() }.map(|e| &e.0).ok_or_else(|| null("expr"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: caller guarantees `len` readable elements at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn k_of(has_k: bool, k: i64) -> Option<i64> {
    has_k.then_some(k)
}

fn write_json(out: *mut *mut c_char, value: &impl serde::Serialize) -> Result<(), Fail> {
    // SAFETY: forwarded from the public entry point's contract.
    let out = unsafe { out_ref(out, "out") }?;
    let text = serde_json::to_string(value).map_err(|e| Fail(PlStatus::Numerical, e.to_string()))?;
    *out = CString::new(text).expect("JSON has no nul bytes").into_raw();
    Ok(())
}

/// Message describing the last failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn pl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pl_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: `s` came from `CString::into_raw` in `write_json`.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parse an expression in `z` (and optionally `k`).
///
/// # Safety
/// `text` must be a valid nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_expr_parse(text: *const c_char, out: *mut *mut PlExpr) -> PlStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        if text.is_null() {
            return Err(null("text"));
        }
        // SAFETY: checked non-null; caller guarantees nul termination.
        let s = unsafe { CStr::from_ptr(text) }
            .to_str()
            .map_err(|e| Fail(PlStatus::InvalidUtf8, e.to_string()))?;
        let e = HoloExpr::parse(s)?;
        *out = Box::into_raw(Box::new(PlExpr(e)));
        Ok(())
    })
}

/// Free a handle from [`pl_expr_parse`]. Null is ignored.
///
/// # Safety
/// `expr` must be null or a live handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pl_expr_free(expr: *mut PlExpr) {
    if !expr.is_null() {
        // SAFETY: handle was created by `Box::into_raw`.
        drop(unsafe { Box::from_raw(expr) });
    }
}

/// Value of the expression at `z`; `k` is used only when `has_k` is set.
///
/// # Safety
/// `expr` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_expr_eval(
    expr: *const PlExpr,
    z: PlComplex,
    has_k: bool,
    k: i64,
    out: *mut PlSpherePoint,
) -> PlStatus {
    guard(|| {
        let e = unsafe { expr_ref(expr) }?;
        let out = unsafe { out_ref(out, "out") }?;
        *out = e.eval(z.into(), k_of(has_k, k))?.into();
        Ok(())
    })
}

/// Spherical derivative `2|f'| / (1 + |f|^2)` at `z`.
///
/// # Safety
/// `expr` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_expr_spherical_derivative(
    expr: *const PlExpr,
    z: PlComplex,
    has_k: bool,
    k: i64,
    out: *mut f64,
) -> PlStatus {
    guard(|| {
        let e = unsafe { expr_ref(expr) }?;
        let out = unsafe { out_ref(out, "out") }?;
        *out = e.spherical_derivative(z.into(), k_of(has_k, k))?;
        Ok(())
    })
}

/// Chordal distance on the Riemann sphere.
#[no_mangle]
pub extern "C" fn pl_chordal(p: PlSpherePoint, q: PlSpherePoint) -> f64 {
    punctlab::chordal(p.into(), q.into())
}

/// Poincaré distance between `z` and `w` in `D(center, radius)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_poincare_distance(
    center: PlComplex,
    radius: f64,
    z: PlComplex,
    w: PlComplex,
    out: *mut f64,
) -> PlStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        let disk = Disk::new(center.into(), radius)?;
        *out = metrics::poincare_distance(&disk, z.into(), w.into())?;
        Ok(())
    })
}

/// Hyperbolic distance in the punctured unit disk.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_punctured_distance(z: PlComplex, w: PlComplex, out: *mut f64) -> PlStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        *out = metrics::punctured_distance(z.into(), w.into())?;
        Ok(())
    })
}

/// Hyperbolic length of `|z| = r` in the punctured unit disk.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_punctured_circle_length(r: f64, out: *mut f64) -> PlStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        *out = metrics::punctured_circle_length(r)?;
        Ok(())
    })
}

/// Chordal diameter of the image of `|z| = r`.
///
/// # Safety
/// `expr` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_diam_circle_image(expr: *const PlExpr, r: f64, samples: usize, out: *mut f64) -> PlStatus {
    guard(|| {
        let e = unsafe { expr_ref(expr) }?;
        let out = unsafe { out_ref(out, "out") }?;
        *out = metrics::diam_circle_image(&Bound::new(e, None), r, samples)?.diameter;
        Ok(())
    })
}

/// Estimate of the Lipschitz constant on `D(center, radius)`.
///
/// # Safety
/// `expr` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_lipschitz_estimate(
    expr: *const PlExpr,
    has_k: bool,
    k: i64,
    center: PlComplex,
    radius: f64,
    budget: usize,
    seed: u64,
    out: *mut f64,
) -> PlStatus {
    guard(|| {
        let e = unsafe { expr_ref(expr) }?;
        let out = unsafe { out_ref(out, "out") }?;
        let disk = Disk::new(center.into(), radius)?;
        *out = lipschitz_estimate(&Bound::new(e, k_of(has_k, k)), &disk, budget, seed)?.value;
        Ok(())
    })
}

/// Normality test of the family on `D(center, radius)` over `ks`; writes the
/// verdict as JSON.
///
/// # Safety
/// `expr` must be a live handle, `ks` must hold `n_ks` values and `out` be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn pl_marty_json(
    expr: *const PlExpr,
    center: PlComplex,
    radius: f64,
    ks: *const i64,
    n_ks: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> PlStatus {
    guard(|| {
        let e = unsafe { expr_ref(expr) }?;
        let ks = unsafe { slice(ks, n_ks, "ks") }?;
        let cfg = MartyConfig { seed, ..MartyConfig::default() };
        write_json(out, &marty_test(e, center.into(), radius, ks, &cfg)?)
    })
}

/// Rescaling analysis at the singularity at 0 over decreasing `radii`;
/// writes the full record as JSON.
///
/// # Safety
/// `expr` must be a live handle, `radii` must hold `n` values and `out` be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn pl_rescale_json(
    expr: *const PlExpr,
    radii: *const f64,
    n: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> PlStatus {
    guard(|| {
        let e = unsafe { expr_ref(expr) }?;
        let radii = unsafe { slice(radii, n, "radii") }?;
        let cfg = PrincipleConfig { radii: radii.to_vec(), seed, ..PrincipleConfig::default() };
        write_json(out, &rescaling_principle(&Bound::new(e, None), &cfg)?)
    })
}

/// Witness search for non-extendability at 0; writes the outcome as JSON.
///
/// # Safety
/// `expr` must be a live handle, `radii` must hold `n` values and `out` be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn pl_lv_json(expr: *const PlExpr, radii: *const f64, n: usize, out: *mut *mut c_char) -> PlStatus {
    guard(|| {
        let e = unsafe { expr_ref(expr) }?;
        let radii = unsafe { slice(radii, n, "radii") }?;
        write_json(out, &lv_witness(&Bound::new(e, None), radii, &LvConfig::default())?)
    })
}

/// Growth profile of `|z| f#(z)` on circles; writes the profile as JSON.
///
/// # Safety
/// `expr` must be a live handle, `radii` must hold `n` values and `out` be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn pl_julia_json(
    expr: *const PlExpr,
    radii: *const f64,
    n: usize,
    out: *mut *mut c_char,
) -> PlStatus {
    guard(|| {
        let e = unsafe { expr_ref(expr) }?;
        let radii = unsafe { slice(radii, n, "radii") }?;
        write_json(out, &julia_indicator(&Bound::new(e, None), radii, &GrowthConfig::default())?)
    })
}
