//! C ABI for the simulator.
//!
//! The surface is deliberately small: build a config (defaults plus
//! string-keyed overrides, the same keys the CLI and TOML files use), run it
//! with a seed, and read the summary back through typed accessors. Handles
//! are opaque; every function returns a status code and `subcdm_last_error`
//! carries the detail for the calling thread.
//!
//! The generated header lands in `include/subcdm.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::ptr;

use subcdm::metrics::AccuracyOutcome;
use subcdm::{run_one, Color, RunSummary, SimConfig};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubcdmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    RunFailed = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Opaque simulation configuration.
pub struct SubcdmConfig {
    inner: SimConfig,
}

/// Opaque end-of-run summary.
pub struct SubcdmSummary {
    inner: RunSummary,
}

/// Message text of the last error on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn subcdm_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|c| c.as_ptr())
            .unwrap_or(ptr::null())
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn subcdm_status_str(status: SubcdmStatus) -> *const c_char {
    let text: &'static CStr = match status {
        SubcdmStatus::Ok => c"ok",
        SubcdmStatus::NullPointer => c"null pointer argument",
        SubcdmStatus::InvalidUtf8 => c"argument is not valid UTF-8",
        SubcdmStatus::InvalidConfig => c"invalid configuration",
        SubcdmStatus::RunFailed => c"simulation run failed",
    };
    text.as_ptr()
}

/// Library version string.
#[no_mangle]
pub extern "C" fn subcdm_version() -> *const c_char {
    static VERSION: &CStr = c"0.1.0";
    VERSION.as_ptr()
}

/// New configuration with the published experimental defaults. Free with
/// `subcdm_config_free`.
#[no_mangle]
pub extern "C" fn subcdm_config_new() -> *mut SubcdmConfig {
    Box::into_raw(Box::new(SubcdmConfig {
        inner: SimConfig::default(),
    }))
}

/// # Safety
/// `cfg` must be a pointer from `subcdm_config_new`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn subcdm_config_free(cfg: *mut SubcdmConfig) {
    if !cfg.is_null() {
        drop(unsafe { Box::from_raw(cfg) });
    }
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, SubcdmStatus> {
    if ptr.is_null() {
        return Err(SubcdmStatus::NullPointer);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_last_error("argument is not valid UTF-8".to_string());
        SubcdmStatus::InvalidUtf8
    })
}

/// Sets one configuration field by its TOML key, e.g.
/// `subcdm_config_set(cfg, "strategy", "distributed")` or
/// `subcdm_config_set(cfg, "black_fraction", "0.40")`.
///
/// # Safety
/// `cfg` must be a live config handle; `key` and `value` must be
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn subcdm_config_set(
    cfg: *mut SubcdmConfig,
    key: *const c_char,
    value: *const c_char,
) -> SubcdmStatus {
    clear_last_error();
    let Some(cfg) = (unsafe { cfg.as_mut() }) else {
        return SubcdmStatus::NullPointer;
    };
    let (key, value) = match (unsafe { cstr_arg(key) }, unsafe { cstr_arg(value) }) {
        (Ok(k), Ok(v)) => (k, v),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    match cfg.inner.apply_kv(key, value) {
        Ok(()) => SubcdmStatus::Ok,
        Err(e) => {
            set_last_error(e.to_string());
            SubcdmStatus::InvalidConfig
        }
    }
}

/// Runs one simulation with the given seed. On success `*out` owns a summary
/// handle; free it with `subcdm_summary_free`.
///
/// # Safety
/// `cfg` must be a live config handle and `out` a valid pointer slot.
#[no_mangle]
pub unsafe extern "C" fn subcdm_run(
    cfg: *const SubcdmConfig,
    seed: u64,
    out: *mut *mut SubcdmSummary,
) -> SubcdmStatus {
    clear_last_error();
    let Some(cfg) = (unsafe { cfg.as_ref() }) else {
        return SubcdmStatus::NullPointer;
    };
    if out.is_null() {
        return SubcdmStatus::NullPointer;
    }
    if let Err(e) = cfg.inner.validate() {
        set_last_error(e.to_string());
        return SubcdmStatus::InvalidConfig;
    }
    match run_one(&cfg.inner, seed) {
        Ok(summary) => {
            unsafe { *out = Box::into_raw(Box::new(SubcdmSummary { inner: summary })) };
            SubcdmStatus::Ok
        }
        Err(e) => {
            set_last_error(e.to_string());
            SubcdmStatus::RunFailed
        }
    }
}

/// # Safety
/// `summary` must be a pointer from `subcdm_run`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn subcdm_summary_free(summary: *mut SubcdmSummary) {
    if !summary.is_null() {
        drop(unsafe { Box::from_raw(summary) });
    }
}

fn with_summary<T>(summary: *const SubcdmSummary, default: T, f: impl Fn(&RunSummary) -> T) -> T {
    match unsafe { summary.as_ref() } {
        Some(s) => f(&s.inner),
        None => default,
    }
}

/// Whether the swarm converged: 1 yes, 0 no, -1 on a null handle.
///
/// # Safety
/// `summary` must be a live summary handle or null.
#[no_mangle]
pub unsafe extern "C" fn subcdm_summary_converged(summary: *const SubcdmSummary) -> c_int {
    with_summary(summary, -1, |s| s.converged as c_int)
}

/// The decision: 0 black, 1 white, -1 undecided.
///
/// # Safety
/// `summary` must be a live summary handle or null.
#[no_mangle]
pub unsafe extern "C" fn subcdm_summary_decision(summary: *const SubcdmSummary) -> c_int {
    with_summary(summary, -1, |s| match s.decision {
        Some(Color::Black) => 0,
        Some(Color::White) => 1,
        None => -1,
    })
}

/// Seconds until the convergence hold completed; NaN if it never did.
///
/// # Safety
/// `summary` must be a live summary handle or null.
#[no_mangle]
pub unsafe extern "C" fn subcdm_summary_convergence_time_s(
    summary: *const SubcdmSummary,
) -> c_double {
    with_summary(summary, f64::NAN, |s| {
        s.convergence_time_s.unwrap_or(f64::NAN)
    })
}

/// Median decision-maker count over the trailing steady window.
///
/// # Safety
/// `summary` must be a live summary handle or null.
#[no_mangle]
pub unsafe extern "C" fn subcdm_summary_steady_subset_size(
    summary: *const SubcdmSummary,
) -> c_double {
    with_summary(summary, f64::NAN, |s| s.steady_subset_size)
}

/// Spatial autocorrelation of the dwell-time field; NaN when undefined.
///
/// # Safety
/// `summary` must be a live summary handle or null.
#[no_mangle]
pub unsafe extern "C" fn subcdm_summary_morans_i(summary: *const SubcdmSummary) -> c_double {
    with_summary(summary, f64::NAN, |s| s.morans_i.unwrap_or(f64::NAN))
}

/// Accuracy outcome: 1 correct, 0 incorrect, -1 undecided.
///
/// # Safety
/// `summary` must be a live summary handle or null.
#[no_mangle]
pub unsafe extern "C" fn subcdm_summary_correct(summary: *const SubcdmSummary) -> c_int {
    with_summary(summary, -1, |s| match s.outcome {
        AccuracyOutcome::Correct => 1,
        AccuracyOutcome::Incorrect => 0,
        AccuracyOutcome::Undecided => -1,
    })
}

/// Ticks executed before the run ended.
///
/// # Safety
/// `summary` must be a live summary handle or null.
#[no_mangle]
pub unsafe extern "C" fn subcdm_summary_ticks(summary: *const SubcdmSummary) -> u64 {
    with_summary(summary, 0, |s| s.ticks)
}

/// Total messages queued by all robots.
///
/// # Safety
/// `summary` must be a live summary handle or null.
#[no_mangle]
pub unsafe extern "C" fn subcdm_summary_messages_sent(summary: *const SubcdmSummary) -> u64 {
    with_summary(summary, 0, |s| s.messages_sent)
}
