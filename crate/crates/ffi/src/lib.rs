//! C interface to `fpduality`.
//!
//! Objects are opaque handles created by `*_new`/`*_run` and released with the
//! matching `*_free`. Every function returns an [`FpdStatus`]; on failure a
//! message is available from [`fpd_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fpduality::analytic::{self, MeanFpt};
use fpduality::duality::{self, Verdict};
use fpduality::simulate::{self, FirstPassageEnsemble, RunOptions};
use fpduality::{DriftSign, ProcessSpec, SimConfig};

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Unsupported = 3,
    SimulationFailed = 4,
    Panic = 5,
}

/// Opaque process description.
pub struct FpdProcess {
    spec: ProcessSpec,
}

/// Opaque first-passage ensemble.
pub struct FpdEnsemble {
    inner: FirstPassageEnsemble,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Failure(FpdStatus, String);

impl Failure {
    fn null(what: &str) -> Self {
        Failure(FpdStatus::NullPointer, format!("{what} is null"))
    }

    fn invalid(msg: impl ToString) -> Self {
        Failure(FpdStatus::InvalidArgument, msg.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FpdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FpdStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            FpdStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn write<T>(p: *mut T, what: &str, value: T) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    p.write(value);
    Ok(())
}

/// Message for the last failed call on this thread, or an empty string.
///
/// The pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn fpd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fpd_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// Creates a process. `sign` is `+1` (outward) or `-1` (inward). For `d = 1`
/// the target must be `a = 0`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn fpd_process_new(
    dimension: u32,
    diffusion: f64,
    drift_strength: f64,
    sign: i32,
    target_radius: f64,
    start_radius: f64,
    out: *mut *mut FpdProcess,
) -> FpdStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let sign = i8::try_from(sign)
            .map_err(|_| Failure::invalid(format!("drift_sign must be +1 or -1, got {sign}")))
            .and_then(|s| DriftSign::try_from(s).map_err(Failure::invalid))?;
        let spec = ProcessSpec::radial(dimension, diffusion, drift_strength, sign, target_radius, start_radius)
            .validate()
            .map_err(Failure::invalid)?;
        out.write(Box::into_raw(Box::new(FpdProcess { spec })));
        Ok(())
    })
}

/// Releases a process. Null is ignored.
///
/// # Safety
/// `process` must come from [`fpd_process_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fpd_process_free(process: *mut FpdProcess) {
    if !process.is_null() {
        drop(Box::from_raw(process));
    }
}

/// Hitting factor `H` at the start radius (1 for inward drift).
///
/// # Safety
/// `process` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fpd_hitting_probability(process: *const FpdProcess, out: *mut f64) -> FpdStatus {
    guard(|| {
        let p = deref(process, "process")?;
        write(out, "out", analytic::hitting_probability(&p.spec))
    })
}

/// Probability that the target is ever reached from the start radius.
///
/// # Safety
/// `process` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fpd_ever_hit_probability(process: *const FpdProcess, out: *mut f64) -> FpdStatus {
    guard(|| {
        let p = deref(process, "process")?;
        write(out, "out", analytic::ever_hit_probability(&p.spec))
    })
}

/// Mean first-passage time, conditioned on hitting when `conditioned != 0`.
///
/// An infinite mean sets `*out_is_infinite = 1` and `*out_value = INFINITY`.
///
/// # Safety
/// `process` must be a live handle; both output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn fpd_mean_fpt(
    process: *const FpdProcess,
    conditioned: i32,
    out_value: *mut f64,
    out_is_infinite: *mut i32,
) -> FpdStatus {
    guard(|| {
        let p = deref(process, "process")?;
        if out_value.is_null() || out_is_infinite.is_null() {
            return Err(Failure::null("output pointer"));
        }
        let mean = analytic::mean_fpt(&p.spec, conditioned != 0)
            .map_err(|e| Failure(FpdStatus::Unsupported, e.to_string()))?;
        let (value, inf) = match mean {
            MeanFpt::Finite(t) => (t, 0),
            MeanFpt::Infinite => (f64::INFINITY, 1),
        };
        out_value.write(value);
        out_is_infinite.write(inf);
        Ok(())
    })
}

/// Simulates `n_paths` paths. `r_escape <= 0` selects the default escape
/// radius; `threads == 0` uses the global pool. Results do not depend on
/// `threads`.
///
/// # Safety
/// `process` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fpd_ensemble_run(
    process: *const FpdProcess,
    n_paths: u64,
    dt: f64,
    t_max: f64,
    r_escape: f64,
    seed: u64,
    threads: u32,
    out: *mut *mut FpdEnsemble,
) -> FpdStatus {
    guard(|| {
        let p = deref(process, "process")?;
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let r_escape = if r_escape > 0.0 {
            r_escape
        } else {
            simulate::default_escape_radius(&p.spec, n_paths)
        };
        let config = SimConfig {
            n_paths,
            dt,
            t_max,
            r_escape,
            seed,
            bridge_correction: true,
        }
        .validate(&p.spec)
        .map_err(Failure::invalid)?;
        let options = RunOptions {
            threads: (threads > 0).then_some(threads as usize),
            enforce_censoring_bound: true,
        };
        let inner = simulate::run_ensemble_with(&p.spec, &config, options)
            .map_err(|e| Failure(FpdStatus::SimulationFailed, e.to_string()))?;
        out.write(Box::into_raw(Box::new(FpdEnsemble { inner })));
        Ok(())
    })
}

/// Releases an ensemble. Null is ignored.
///
/// # Safety
/// `ensemble` must come from [`fpd_ensemble_run`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fpd_ensemble_free(ensemble: *mut FpdEnsemble) {
    if !ensemble.is_null() {
        drop(Box::from_raw(ensemble));
    }
}

/// # Safety
/// `ensemble` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fpd_ensemble_n_paths(ensemble: *const FpdEnsemble, out: *mut u64) -> FpdStatus {
    guard(|| {
        let e = deref(ensemble, "ensemble")?;
        write(out, "out", e.inner.n_paths() as u64)
    })
}

/// # Safety
/// `ensemble` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fpd_ensemble_n_hits(ensemble: *const FpdEnsemble, out: *mut u64) -> FpdStatus {
    guard(|| {
        let e = deref(ensemble, "ensemble")?;
        write(out, "out", e.inner.n_hits() as u64)
    })
}

/// Copies hit times, in path order, into `buf`.
///
/// `*out_len` receives the number of hits. If `cap` is too small nothing is
/// copied and `FPD_STATUS_INVALID_ARGUMENT` is returned; `buf` may be null
/// when `cap == 0` to query the size.
///
/// # Safety
/// `ensemble` must be a live handle, `buf` valid for `cap` writes, `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn fpd_ensemble_hit_times(
    ensemble: *const FpdEnsemble,
    buf: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> FpdStatus {
    guard(|| {
        let e = deref(ensemble, "ensemble")?;
        let times: Vec<f64> = e.inner.outcomes.iter().filter_map(|o| o.hit_time()).collect();
        write(out_len, "out_len", times.len())?;
        if cap == 0 && times.is_empty() {
            return Ok(());
        }
        if cap < times.len() {
            return Err(Failure::invalid(format!("buffer holds {cap}, need {}", times.len())));
        }
        if buf.is_null() {
            return Err(Failure::null("buf"));
        }
        ptr::copy_nonoverlapping(times.as_ptr(), buf, times.len());
        Ok(())
    })
}

/// Two-sample KS test of the conditioned hit times of a `±` pair.
///
/// # Safety
/// Both ensembles must be live handles; all output pointers writable.
#[no_mangle]
pub unsafe extern "C" fn fpd_ks_duality(
    plus: *const FpdEnsemble,
    minus: *const FpdEnsemble,
    alpha: f64,
    out_statistic: *mut f64,
    out_critical: *mut f64,
    out_pass: *mut i32,
) -> FpdStatus {
    guard(|| {
        let plus = deref(plus, "plus")?;
        let minus = deref(minus, "minus")?;
        if out_statistic.is_null() || out_critical.is_null() || out_pass.is_null() {
            return Err(Failure::null("output pointer"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Failure::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let ks = duality::check_distribution_duality(&plus.inner, &minus.inner, alpha).map_err(Failure::invalid)?;
        out_statistic.write(ks.ks_statistic);
        out_critical.write(ks.ks_critical);
        out_pass.write(i32::from(ks.verdict == Verdict::Pass));
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_sign_sets_error() {
        let mut p = ptr::null_mut();
        let status = unsafe { fpd_process_new(3, 1.0, 1.0, 0, 1.0, 2.0, &mut p) };
        assert_eq!(status, FpdStatus::InvalidArgument);
        assert!(p.is_null());
        let msg = unsafe { CStr::from_ptr(fpd_last_error()) }.to_str().unwrap();
        assert!(msg.contains("drift_sign"), "{msg}");
    }

    #[test]
    fn version_matches_crate() {
        let v = unsafe { CStr::from_ptr(fpd_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
