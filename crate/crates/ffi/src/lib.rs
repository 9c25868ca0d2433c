//! C interface to `evtcure`.
//!
//! Samples live behind the opaque [`EvtcureSample`] handle. Every function
//! returns an [`EvtcureStatus`]; on failure a message is available from
//! [`evtcure_last_error_message`] until the next call on the same thread.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use evtcure::selection::{select_y_star, YSelectionConfig};
use evtcure::{
    corrected_estimate, kaplan_meier, plateau_estimate, psi_transform, sigma2_plugin,
    wald_interval, CorrectionInput, Error, SurvivalSample,
};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvtcureStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Degenerate = 3,
    NumericalFailure = 4,
    Panic = 5,
}

/// Opaque survival sample.
pub struct EvtcureSample {
    inner: SurvivalSample,
}

/// Corrected estimate for one `y`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EvtcureEstimate {
    pub p_hat_y: f64,
    /// NaN when the correction is undefined.
    pub y_gamma_hat: f64,
    /// Nonzero when the estimate fell back to the plateau.
    pub fallback_used: i32,
}

/// Result of the bootstrap selection of `y`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EvtcureSelection {
    pub y_star: f64,
    pub estimate: EvtcureEstimate,
    pub p_hat_n: f64,
    pub bootstrap_mean: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> EvtcureStatus {
    match err {
        Error::DegenerateDenominator => EvtcureStatus::Degenerate,
        Error::QuadratureFailure { .. } => EvtcureStatus::NumericalFailure,
        _ => EvtcureStatus::InvalidInput,
    }
}

fn guard<F: FnOnce() -> Result<(), (EvtcureStatus, String)>>(f: F) -> EvtcureStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EvtcureStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            EvtcureStatus::Panic
        }
    }
}

fn lift(err: Error) -> (EvtcureStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(name: &str) -> (EvtcureStatus, String) {
    (EvtcureStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn sample_ref<'a>(handle: *const EvtcureSample) -> Result<&'a SurvivalSample, (EvtcureStatus, String)> {
    handle.as_ref().map(|h| &h.inner).ok_or_else(|| null("sample"))
}

unsafe fn slice<'a, T>(data: *const T, len: usize, name: &str) -> Result<&'a [T], (EvtcureStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), (EvtcureStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

/// Builds a sample from `len` times and event flags (nonzero = event).
///
/// # Safety
/// `times` and `events` must point to `len` readable values; `out` must be
/// writable. Free the result with [`evtcure_sample_free`].
#[no_mangle]
pub unsafe extern "C" fn evtcure_sample_new(
    times: *const f64,
    events: *const i32,
    len: usize,
    out: *mut *mut EvtcureSample,
) -> EvtcureStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let times = slice(times, len, "times")?;
        let events: Vec<bool> = slice(events, len, "events")?.iter().map(|&e| e != 0).collect();
        let inner = SurvivalSample::from_columns(times, &events).map_err(lift)?;
        out.write(Box::into_raw(Box::new(EvtcureSample { inner })));
        Ok(())
    })
}

/// Releases a sample. Null is ignored.
///
/// # Safety
/// `sample` must come from [`evtcure_sample_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn evtcure_sample_free(sample: *mut EvtcureSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// # Safety
/// `sample` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn evtcure_sample_len(sample: *const EvtcureSample, out: *mut usize) -> EvtcureStatus {
    guard(|| write(out, sample_ref(sample)?.len(), "out"))
}

/// Kaplan-Meier estimate of the distribution function at the largest
/// observed time.
///
/// # Safety
/// `sample` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn evtcure_plateau(sample: *const EvtcureSample, out: *mut f64) -> EvtcureStatus {
    guard(|| write(out, plateau_estimate(sample_ref(sample)?), "out"))
}

/// Kaplan-Meier distribution function at `t` (right-continuous).
///
/// # Safety
/// `sample` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn evtcure_km_evaluate(
    sample: *const EvtcureSample,
    t: f64,
    out: *mut f64,
) -> EvtcureStatus {
    guard(|| {
        if t.is_nan() {
            return Err((EvtcureStatus::InvalidInput, "`t` is NaN".into()));
        }
        write(out, kaplan_meier(sample_ref(sample)?).evaluate(t), "out")
    })
}

/// Corrected estimate from the three curve levels `F(τ)`, `F(yτ)`, `F(y²τ)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evtcure_corrected_estimate(
    f_tau: f64,
    f_y_tau: f64,
    f_y2_tau: f64,
    y: f64,
    out: *mut EvtcureEstimate,
) -> EvtcureStatus {
    guard(|| {
        if !(y > 0.0 && y < 1.0) {
            return Err((EvtcureStatus::InvalidInput, format!("y = {y} is not in (0, 1)")));
        }
        let e = corrected_estimate(&CorrectionInput {
            f_tau,
            f_y_tau,
            f_y2_tau,
            y,
        });
        write(
            out,
            EvtcureEstimate {
                p_hat_y: e.p_hat_y,
                y_gamma_hat: e.y_gamma_hat,
                fallback_used: e.fallback_used as i32,
            },
            "out",
        )
    })
}

/// Bootstrap selection of `y` over `grid`.
///
/// # Safety
/// `sample` must be a live handle, `grid` must point to `grid_len` values and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evtcure_select_y_star(
    sample: *const EvtcureSample,
    grid: *const f64,
    grid_len: usize,
    n_bootstrap: usize,
    seed: u64,
    out: *mut EvtcureSelection,
) -> EvtcureStatus {
    guard(|| {
        let cfg = YSelectionConfig {
            grid: slice(grid, grid_len, "grid")?.to_vec(),
            n_bootstrap,
            seed,
        };
        let sel = select_y_star(sample_ref(sample)?, &cfg).map_err(lift)?;
        write(
            out,
            EvtcureSelection {
                y_star: sel.y_star,
                estimate: EvtcureEstimate {
                    p_hat_y: sel.estimate.p_hat_y,
                    y_gamma_hat: sel.estimate.y_gamma_hat,
                    fallback_used: sel.estimate.fallback_used as i32,
                },
                p_hat_n: sel.p_hat_n,
                bootstrap_mean: sel.bootstrap_mean,
            },
            "out",
        )
    })
}

/// Plug-in asymptotic variance of the corrected estimate at `y`.
///
/// # Safety
/// `sample` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn evtcure_sigma2_plugin(
    sample: *const EvtcureSample,
    y: f64,
    out: *mut f64,
) -> EvtcureStatus {
    guard(|| {
        let b = sigma2_plugin(sample_ref(sample)?, y).map_err(lift)?;
        write(out, b.sigma2, "out")
    })
}

/// Wald interval `p ± z·sqrt(σ²/n)`.
///
/// # Safety
/// `lower` and `upper` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evtcure_wald_interval(
    p_hat: f64,
    sigma2: f64,
    n: usize,
    level: f64,
    lower: *mut f64,
    upper: *mut f64,
) -> EvtcureStatus {
    guard(|| {
        if lower.is_null() || upper.is_null() {
            return Err(null("lower/upper"));
        }
        let (lo, hi) = wald_interval(p_hat, sigma2, n, level).map_err(lift)?;
        lower.write(lo);
        upper.write(hi);
        Ok(())
    })
}

/// Maps `len` times through `t -> 1/(tau0 - t)` into `out`.
///
/// # Safety
/// `times` must be readable and `out` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn evtcure_psi_transform(
    times: *const f64,
    len: usize,
    tau0: f64,
    out: *mut f64,
) -> EvtcureStatus {
    guard(|| {
        let mapped = psi_transform(slice(times, len, "times")?, tau0).map_err(lift)?;
        if len > 0 && out.is_null() {
            return Err(null("out"));
        }
        if len > 0 {
            ptr::copy_nonoverlapping(mapped.as_ptr(), out, len);
        }
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn evtcure_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn evtcure_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
