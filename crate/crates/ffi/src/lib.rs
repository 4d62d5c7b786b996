//! C interface to the bi-contextuality core.
//!
//! Behaviors and decision reports cross the boundary as opaque handles that
//! the caller releases with the matching `*_free` function. Every fallible
//! call returns a [`BictxStatus`]; on failure a description is available from
//! [`bictx_last_error`] until the next failing call on the same thread.
//! Panics never unwind into C; they surface as `BICTX_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bictx_core::behavior::{pair_distribution_from_moments, Behavior, Realization};
use bictx_core::decision::{decide_single, mix_behaviors, DecisionReport, Verdict};
use bictx_core::quantum::ideal_behavior;
use bictx_core::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BictxStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A mean, correlation or mixing weight passed as a number left [-1, 1]
    /// (or [0, 1] for weights).
    Domain = 2,
    /// Malformed JSON, inconsistent data or a violated precondition.
    InvalidInput = 3,
    /// The report carries no witness (the behavior is bi-contextual).
    NoWitness = 4,
    /// A bug in the library; the message has details.
    Internal = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BictxVerdict {
    NonBiContextual = 0,
    BiContextual = 1,
}

/// Admissible intervals `[L_i, R_i]` of the per-source correlations.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BictxBounds {
    pub l1: f64,
    pub r1: f64,
    pub l2: f64,
    pub r2: f64,
}

/// Which of the four rectangle sides the hyperbola meets.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BictxSides {
    pub left: bool,
    pub right: bool,
    pub upper: bool,
    pub lower: bool,
}

/// Factorized model: `mu1`/`mu2` are the cells `(+,+), (+,-), (-,+), (-,-)`
/// of each source's distribution over `(alpha_i, beta_i)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BictxWitness {
    pub c1: f64,
    pub c2: f64,
    pub mu1: [f64; 4],
    pub mu2: [f64; 4],
}

/// Opaque behavior handle.
pub struct BictxBehavior {
    inner: Behavior,
}

/// Opaque decision report handle.
pub struct BictxReport {
    inner: DecisionReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> BictxStatus {
    match e {
        Error::Domain { .. } | Error::Weight(_) => BictxStatus::Domain,
        Error::NoWitness => BictxStatus::NoWitness,
        _ => BictxStatus::InvalidInput,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), (BictxStatus, String)>) -> BictxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BictxStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            BictxStatus::Internal
        }
    }
}

fn core_err(e: Error) -> (BictxStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (BictxStatus, String) {
    (BictxStatus::NullPointer, format!("{name} is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (BictxStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn write<T>(p: *mut T, name: &str, value: T) -> Result<(), (BictxStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    p.write(value);
    Ok(())
}

fn boxed_behavior(b: Behavior) -> *mut BictxBehavior {
    Box::into_raw(Box::new(BictxBehavior { inner: b }))
}

/// Message of the last failed call on this thread, or null if none failed.
/// The string stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bictx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bictx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a behavior from its five means.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bictx_behavior_new(
    alpha1: f64,
    alpha2: f64,
    beta1: f64,
    beta2: f64,
    corr_ab: f64,
    out: *mut *mut BictxBehavior,
) -> BictxStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let b = Behavior::new(alpha1, alpha2, beta1, beta2, corr_ab).map_err(core_err)?;
        write(out, "out", boxed_behavior(b))
    })
}

/// Parses a behavior from JSON (`alpha1`, `alpha2`, `beta1`, `beta2`,
/// `corrAB`, optional `meanA`, `meanB`, `tables`). Any rejection, including
/// an out-of-range mean, is `BICTX_STATUS_INVALID_INPUT`.
///
/// # Safety
/// `json` must be null or a NUL-terminated string; `out` must be null or
/// valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bictx_behavior_from_json(json: *const c_char, out: *mut *mut BictxBehavior) -> BictxStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (BictxStatus::InvalidInput, format!("json is not UTF-8: {e}")))?;
        let b: Behavior = serde_json::from_str(text).map_err(|e| (BictxStatus::InvalidInput, e.to_string()))?;
        write(out, "out", boxed_behavior(b))
    })
}

/// Exact behavior of two copies of `cos(theta)|0> + sin(theta) e^{i phi}|1>`.
/// `theta` outside `[0, pi/2]` is `BICTX_STATUS_INVALID_INPUT`.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bictx_behavior_ideal(theta: f64, phi: f64, out: *mut *mut BictxBehavior) -> BictxStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let b = ideal_behavior(theta, phi).map_err(core_err)?;
        write(out, "out", boxed_behavior(b))
    })
}

/// `w * b1 + (1 - w) * b2`.
///
/// # Safety
/// `b1` and `b2` must be null or live handles; `out` must be null or valid
/// for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bictx_behavior_mix(
    b1: *const BictxBehavior,
    w: f64,
    b2: *const BictxBehavior,
    out: *mut *mut BictxBehavior,
) -> BictxStatus {
    guard(|| {
        let (b1, b2) = (deref(b1, "b1")?, deref(b2, "b2")?);
        if out.is_null() {
            return Err(null("out"));
        }
        let m = mix_behaviors(&b1.inner, w, &b2.inner).map_err(core_err)?;
        write(out, "out", boxed_behavior(m))
    })
}

/// Copies `(alpha1, alpha2, beta1, beta2, corrAB)` into `out[0..5]`.
///
/// # Safety
/// `b` must be null or a live handle; `out` must be null or valid for
/// writing five doubles.
#[no_mangle]
pub unsafe extern "C" fn bictx_behavior_moments(b: *const BictxBehavior, out: *mut f64) -> BictxStatus {
    guard(|| {
        let b = deref(b, "behavior")?;
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(b.inner.moments().as_ptr(), out, 5);
        Ok(())
    })
}

/// Releases a behavior. Null is ignored.
///
/// # Safety
/// `b` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bictx_behavior_free(b: *mut BictxBehavior) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Runs the decision procedure; non-bi-contextual reports carry a witness.
///
/// # Safety
/// `b` must be null or a live handle; `out` must be null or valid for
/// writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bictx_decide(b: *const BictxBehavior, out: *mut *mut BictxReport) -> BictxStatus {
    guard(|| {
        let b = deref(b, "behavior")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let rep = decide_single(&b.inner);
        write(out, "out", Box::into_raw(Box::new(BictxReport { inner: rep })))
    })
}

/// # Safety
/// `r` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn bictx_report_verdict(r: *const BictxReport, out: *mut BictxVerdict) -> BictxStatus {
    guard(|| {
        let r = deref(r, "report")?;
        let v = match r.inner.verdict {
            Verdict::NonBiContextual => BictxVerdict::NonBiContextual,
            Verdict::BiContextual => BictxVerdict::BiContextual,
        };
        write(out, "out", v)
    })
}

/// `(<AB> - min)(<AB> - max)`, positive for bi-contextual behaviors.
///
/// # Safety
/// `r` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn bictx_report_single_lhs(r: *const BictxReport, out: *mut f64) -> BictxStatus {
    guard(|| write(out, "out", deref(r, "report")?.inner.single_lhs))
}

/// Smallest and largest corner product, written to `min` and `max`.
///
/// # Safety
/// `r` must be null or a live handle; `min` and `max` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn bictx_report_range(r: *const BictxReport, min: *mut f64, max: *mut f64) -> BictxStatus {
    guard(|| {
        let r = deref(r, "report")?;
        if min.is_null() || max.is_null() {
            return Err(null("min/max"));
        }
        write(min, "min", r.inner.product_min)?;
        write(max, "max", r.inner.product_max)
    })
}

/// # Safety
/// `r` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn bictx_report_bounds(r: *const BictxReport, out: *mut BictxBounds) -> BictxStatus {
    guard(|| {
        let b = deref(r, "report")?.inner.bounds;
        write(
            out,
            "out",
            BictxBounds {
                l1: b.l1,
                r1: b.r1,
                l2: b.l2,
                r2: b.r2,
            },
        )
    })
}

/// # Safety
/// `r` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn bictx_report_sides(r: *const BictxReport, out: *mut BictxSides) -> BictxStatus {
    guard(|| {
        let s = deref(r, "report")?.inner.sides();
        write(
            out,
            "out",
            BictxSides {
                left: s.left,
                right: s.right,
                upper: s.upper,
                lower: s.lower,
            },
        )
    })
}

/// Copies the witness model; `BICTX_STATUS_NO_WITNESS` for bi-contextual reports.
///
/// # Safety
/// `r` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn bictx_report_witness(r: *const BictxReport, out: *mut BictxWitness) -> BictxStatus {
    guard(|| {
        let r = deref(r, "report")?;
        let w = r.inner.witness.ok_or_else(|| {
            (
                BictxStatus::NoWitness,
                "behavior is bi-contextual; no witness".to_string(),
            )
        })?;
        write(
            out,
            "out",
            BictxWitness {
                c1: w.c1,
                c2: w.c2,
                mu1: w.mu1.cells(),
                mu2: w.mu2.cells(),
            },
        )
    })
}

/// The full report as JSON. Release the string with [`bictx_string_free`].
///
/// # Safety
/// `r` must be null or a live handle; `out` must be null or valid for
/// writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bictx_report_to_json(r: *const BictxReport, out: *mut *mut c_char) -> BictxStatus {
    guard(|| {
        let r = deref(r, "report")?;
        let s = serde_json::to_string(&r.inner).map_err(|e| (BictxStatus::Internal, e.to_string()))?;
        let c = CString::new(s).map_err(|e| (BictxStatus::Internal, e.to_string()))?;
        write(out, "out", c.into_raw())
    })
}

/// Releases a report. Null is ignored.
///
/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bictx_report_free(r: *mut BictxReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bictx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Cells `(+,+), (+,-), (-,+), (-,-)` of the distribution with the given
/// means and correlation. `*valid` is false when a cell is negative; the
/// cells are written either way, so the negative one can be inspected.
///
/// # Safety
/// `cells` must be null or valid for writing four doubles; `valid` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn bictx_pair_distribution(
    mean_q: f64,
    mean_r: f64,
    corr: f64,
    cells: *mut f64,
    valid: *mut bool,
) -> BictxStatus {
    guard(|| {
        if cells.is_null() || valid.is_null() {
            return Err(null("cells/valid"));
        }
        let (values, ok) = match pair_distribution_from_moments(mean_q, mean_r, corr).map_err(core_err)? {
            Realization::Valid(d) => (d.cells(), true),
            Realization::Negative(cert) => (cert.cells, false),
        };
        ptr::copy_nonoverlapping(values.as_ptr(), cells, 4);
        write(valid, "valid", ok)
    })
}
