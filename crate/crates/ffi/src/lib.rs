//! C interface to `ris-secrecy`.
//!
//! Every entry point returns an [`RssStatus`]; results go through out
//! pointers. On failure a message is kept per thread and can be read with
//! [`rss_last_error_message`]. Objects created here are opaque and must be
//! released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use ris_secrecy::channel_model::scenario_gains;
use ris_secrecy::optimizer::grid_oracle;
use ris_secrecy::secrecy_rate::snr_coefficients;
use ris_secrecy::wiretap_sim::{mutual_information, renyi_divergence, tv_distance, DiscreteChannel};
use ris_secrecy::{optimize, Error, OptimizerConfig, Scenario, SnrCoefficients};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RssStatus {
    Ok = 0,
    /// A required pointer argument was null.
    Null = 1,
    Domain = 2,
    Dimension = 3,
    /// Exact enumeration would exceed the state budget.
    Budget = 4,
    Io = 5,
    /// Malformed JSON or text.
    Parse = 6,
    /// The library panicked; this is a bug.
    Panic = 7,
}

/// A scenario loaded from JSON.
pub struct RssScenario(Scenario);

/// Per-link SNR slopes of Bob and each eavesdropper.
pub struct RssCoefficients(SnrCoefficients);

/// A finite-alphabet channel.
pub struct RssChannel(DiscreteChannel);

/// Power split and the secrecy rate it achieves.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RssAllocation {
    pub p1: f64,
    pub p2: f64,
    pub pt: f64,
    /// Secrecy rate in nats, not clamped.
    pub rate: f64,
    /// Minorize-maximization steps taken (0 for the grid search).
    pub iterations: usize,
    pub converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

struct Failure(RssStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Domain(_) | Error::Usage(_) => RssStatus::Domain,
            Error::Dimension(_) => RssStatus::Dimension,
            Error::Budget { .. } => RssStatus::Budget,
            Error::Io { .. } => RssStatus::Io,
            Error::Json { .. } | Error::Csv(_) => RssStatus::Parse,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(RssStatus::Null, format!("{what} is null"))
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RssStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            RssStatus::Ok
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
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            RssStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn floats<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

/// Message describing the last failure on this thread, or an empty string.
/// The pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn rss_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a scenario from a NUL-terminated UTF-8 JSON document.
///
/// # Safety
/// `json` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rss_scenario_from_json(json: *const c_char, out: *mut *mut RssScenario) -> RssStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure(RssStatus::Parse, format!("scenario is not UTF-8: {e}")))?;
        let s = Scenario::from_json_str(text).map_err(|e| Failure(RssStatus::Parse, e.to_string()))?;
        s.validate()?;
        write(out, Box::into_raw(Box::new(RssScenario(s))))
    })
}

/// # Safety
/// `s` must come from [`rss_scenario_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rss_scenario_free(s: *mut RssScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Transmit budget of the scenario in watts.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rss_scenario_total_power_w(s: *const RssScenario, out: *mut f64) -> RssStatus {
    guard(|| write(out, borrow(s, "scenario")?.0.total_power_w()))
}

/// SNR slopes of every link in the scenario.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rss_scenario_coefficients(s: *const RssScenario, out: *mut *mut RssCoefficients) -> RssStatus {
    guard(|| {
        let s = &borrow(s, "scenario")?.0;
        let c = snr_coefficients(&scenario_gains(s)?, s.noise_power_w())?;
        write(out, Box::into_raw(Box::new(RssCoefficients(c))))
    })
}

/// Builds slopes directly: Bob's `mu1`, `mu2` and `eve_count` eavesdropper
/// pairs from `beta1[j]`, `beta2[j]`.
///
/// # Safety
/// `beta1` and `beta2` must point to `eve_count` doubles each.
#[no_mangle]
pub unsafe extern "C" fn rss_coefficients_new(
    mu1: f64,
    mu2: f64,
    beta1: *const f64,
    beta2: *const f64,
    eve_count: usize,
    out: *mut *mut RssCoefficients,
) -> RssStatus {
    guard(|| {
        let b1 = floats(beta1, eve_count, "beta1")?.to_vec();
        let b2 = floats(beta2, eve_count, "beta2")?.to_vec();
        let c = SnrCoefficients::new(mu1, mu2, b1, b2)?;
        write(out, Box::into_raw(Box::new(RssCoefficients(c))))
    })
}

/// # Safety
/// `c` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rss_coefficients_free(c: *mut RssCoefficients) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Secrecy rate in nats at `(p1, p2)`; may be negative.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rss_secrecy_rate(c: *const RssCoefficients, p1: f64, p2: f64, out: *mut f64) -> RssStatus {
    guard(|| {
        let c = &borrow(c, "coefficients")?.0;
        if !(p1 >= 0.0 && p2 >= 0.0) {
            return Err(Error::Domain(format!("powers must be non-negative, got ({p1}, {p2})")).into());
        }
        write(out, c.rate(p1, p2))
    })
}

/// Optimizes the split of budget `pt`. Zero `max_iterations` or non-positive
/// `tolerance` select the defaults (500 and 1e-9).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rss_optimize(
    c: *const RssCoefficients,
    pt: f64,
    max_iterations: usize,
    tolerance: f64,
    out: *mut RssAllocation,
) -> RssStatus {
    guard(|| {
        let c = &borrow(c, "coefficients")?.0;
        let d = OptimizerConfig::default();
        let cfg = OptimizerConfig {
            max_iterations: if max_iterations == 0 {
                d.max_iterations
            } else {
                max_iterations
            },
            tolerance: if tolerance > 0.0 { tolerance } else { d.tolerance },
            ..d
        };
        let (a, trace) = optimize(c, pt, &cfg, None)?;
        write(
            out,
            RssAllocation {
                p1: a.p1,
                p2: a.p2,
                pt: a.pt,
                rate: c.rate(a.p1, a.p2),
                iterations: trace.iterations(),
                converged: trace.converged,
            },
        )
    })
}

/// Best grid point with spacing `resolution · pt`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rss_grid_oracle(
    c: *const RssCoefficients,
    pt: f64,
    resolution: f64,
    out: *mut RssAllocation,
) -> RssStatus {
    guard(|| {
        let c = &borrow(c, "coefficients")?.0;
        let (a, rate) = grid_oracle(c, pt, resolution)?;
        write(
            out,
            RssAllocation {
                p1: a.p1,
                p2: a.p2,
                pt: a.pt,
                rate,
                iterations: 0,
                converged: true,
            },
        )
    })
}

/// Channel from a row-major `inputs × outputs` matrix of `K(z | x)`.
///
/// # Safety
/// `rows` must point to `inputs · outputs` doubles.
#[no_mangle]
pub unsafe extern "C" fn rss_channel_new(
    rows: *const f64,
    inputs: usize,
    outputs: usize,
    out: *mut *mut RssChannel,
) -> RssStatus {
    guard(|| {
        let len = inputs
            .checked_mul(outputs)
            .ok_or_else(|| Failure(RssStatus::Dimension, "matrix size overflows".into()))?;
        let flat = floats(rows, len, "rows")?;
        let matrix = if outputs == 0 {
            vec![]
        } else {
            flat.chunks(outputs).map(<[f64]>::to_vec).collect()
        };
        let ch = DiscreteChannel::new(matrix)?;
        write(out, Box::into_raw(Box::new(RssChannel(ch))))
    })
}

/// # Safety
/// `ch` must come from [`rss_channel_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rss_channel_free(ch: *mut RssChannel) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

/// Total variation distance of two probability vectors of length `len`.
///
/// # Safety
/// `p` and `q` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rss_tv_distance(p: *const f64, q: *const f64, len: usize, out: *mut f64) -> RssStatus {
    guard(|| write(out, tv_distance(floats(p, len, "p")?, floats(q, len, "q")?)?))
}

/// Rényi divergence of order `alpha` (not 1) in nats; may be infinite.
///
/// # Safety
/// `p` and `q` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rss_renyi_divergence(
    p: *const f64,
    q: *const f64,
    len: usize,
    alpha: f64,
    out: *mut f64,
) -> RssStatus {
    guard(|| {
        write(
            out,
            renyi_divergence(floats(p, len, "p")?, floats(q, len, "q")?, alpha)?,
        )
    })
}

/// Mutual information in nats between the channel input, distributed as
/// `qx` (length = number of inputs), and its output.
///
/// # Safety
/// `qx` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rss_mutual_information(
    ch: *const RssChannel,
    qx: *const f64,
    len: usize,
    out: *mut f64,
) -> RssStatus {
    guard(|| {
        let ch = &borrow(ch, "channel")?.0;
        write(out, mutual_information(ch, floats(qx, len, "qx")?)?)
    })
}
