//! C ABI for the battsched scheduling library.
//!
//! Design: opaque handles for anything with internal invariants
//! (degradation curves, optimization results), plain `repr(C)` structs
//! for parameter bundles, and integer status codes for every fallible
//! call. The most recent failure's detail is kept per thread and can be
//! fetched with [`battsched_last_error_message`].
//!
//! The header is generated into `include/battsched.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use battsched::battery::{simulate_soc, BatteryParams, DegradationCurve, Schedule};
use battsched::cost::{EfficiencyParams, PriceScenario};
use battsched::objective::ObjectiveConfig;
use battsched::optimizer::{optimize_schedule, OptimizationResult, OptimizerConfig};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BattschedStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A parameter violated its documented range or invariant.
    InvalidArgument = 3,
    /// A file failed to read or parse.
    ParseError = 4,
    /// Buffer or length arguments do not match the data.
    LengthMismatch = 5,
    /// Optimization or factorization failed numerically.
    NumericalError = 6,
    /// The library panicked internally; state is still consistent.
    InternalPanic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_for(error: &battsched::Error) -> BattschedStatus {
    use battsched::Error::*;
    set_last_error(&error.to_string());
    match error {
        Invalid { .. } | Config { .. } | HorizonMismatch { .. } => BattschedStatus::InvalidArgument,
        Csv { .. } | Io { .. } => BattschedStatus::ParseError,
        NonFiniteProbe { .. } | AllRestartsDiverged { .. } | Factorization { .. }
        | RankDeficient { .. } => BattschedStatus::NumericalError,
    }
}

/// Runs a closure, converting panics into a status code so unwinding
/// never crosses the C boundary.
fn guarded(body: impl FnOnce() -> BattschedStatus) -> BattschedStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic");
            BattschedStatus::InternalPanic
        }
    }
}

/// Opaque handle to a validated degradation curve.
pub struct BattschedCurve {
    inner: DegradationCurve,
}

/// Opaque handle to a finished optimization.
pub struct BattschedOptimization {
    result: OptimizationResult,
    soc_trajectory: Vec<f64>,
}

/// Battery constants; see `battsched_battery_params_default` for the
/// stock cell values.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BattschedBatteryParams {
    /// Trading-interval length in hours.
    pub delta_t: f64,
    /// Nominal voltage in volts.
    pub v_nom: f64,
    /// 1C current in amperes.
    pub i_1c: f64,
    /// Power magnitude cap in watts.
    pub p_b_max: f64,
}

/// Optimizer settings; see `battsched_optimizer_params_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BattschedOptimizerParams {
    /// Dimensionless descent rate when `auto_scale` is true, otherwise a
    /// raw step length.
    pub step_size: f64,
    /// Momentum factor in [0, 1).
    pub momentum: f64,
    /// Central-difference step in watts.
    pub fd_step: f64,
    pub max_iters: usize,
    pub n_restarts: usize,
    /// Uniform initialization range for restart starting points.
    pub init_lo: f64,
    pub init_hi: f64,
    pub seed: u64,
    pub auto_scale: bool,
}

fn to_battery(params: &BattschedBatteryParams) -> BatteryParams {
    BatteryParams {
        delta_t: params.delta_t,
        v_nom: params.v_nom,
        i_1c: params.i_1c,
        p_b_max: params.p_b_max,
        soc_min: 0.0,
        soc_max: 100.0,
    }
}

fn to_optimizer(params: &BattschedOptimizerParams) -> OptimizerConfig {
    OptimizerConfig {
        step_size: params.step_size,
        momentum: params.momentum,
        fd_step: params.fd_step,
        max_iters: params.max_iters,
        n_restarts: params.n_restarts,
        init_power_range: (params.init_lo, params.init_hi),
        seed: params.seed,
        auto_scale: params.auto_scale,
        parallel: false,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn battsched_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the most recent error message for this thread into `buf`
/// (truncated, always NUL-terminated when `cap > 0`) and returns the full
/// message length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must point to at least `cap` writable bytes, or be null with
/// `cap == 0` to query the length alone.
#[no_mangle]
pub unsafe extern "C" fn battsched_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Stock battery constants: 1 h intervals, 3.7 V, 2.15 A at 1C, 5 W cap.
#[no_mangle]
pub extern "C" fn battsched_battery_params_default() -> BattschedBatteryParams {
    let p = BatteryParams::default();
    BattschedBatteryParams {
        delta_t: p.delta_t,
        v_nom: p.v_nom,
        i_1c: p.i_1c,
        p_b_max: p.p_b_max,
    }
}

/// Stock optimizer settings (matching the library defaults).
#[no_mangle]
pub extern "C" fn battsched_optimizer_params_default() -> BattschedOptimizerParams {
    let o = OptimizerConfig::default();
    BattschedOptimizerParams {
        step_size: o.step_size,
        momentum: o.momentum,
        fd_step: o.fd_step,
        max_iters: o.max_iters,
        n_restarts: o.n_restarts,
        init_lo: o.init_power_range.0,
        init_hi: o.init_power_range.1,
        seed: o.seed,
        auto_scale: o.auto_scale,
    }
}

/// The built-in synthetic degradation curve. Never fails; free with
/// `battsched_curve_free`.
#[no_mangle]
pub extern "C" fn battsched_curve_default() -> *mut BattschedCurve {
    Box::into_raw(Box::new(BattschedCurve {
        inner: DegradationCurve::synthetic_default(),
    }))
}

/// Loads a degradation curve from a CSV file with header
/// `soc_percent,cumulative_degradation`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer; on
/// success `*out` owns a curve that must be freed with
/// `battsched_curve_free`.
#[no_mangle]
pub unsafe extern "C" fn battsched_curve_load(
    path: *const c_char,
    out: *mut *mut BattschedCurve,
) -> BattschedStatus {
    guarded(|| {
        if path.is_null() || out.is_null() {
            set_last_error("null pointer argument");
            return BattschedStatus::NullPointer;
        }
        let path = match CStr::from_ptr(path).to_str() {
            Ok(p) => p,
            Err(_) => {
                set_last_error("path is not valid UTF-8");
                return BattschedStatus::InvalidUtf8;
            }
        };
        match battsched::io::read_curve_csv(Path::new(path)) {
            Ok(curve) => {
                *out = Box::into_raw(Box::new(BattschedCurve { inner: curve }));
                BattschedStatus::Ok
            }
            Err(e) => status_for(&e),
        }
    })
}

/// # Safety
/// `curve` must have come from this library and not been freed already;
/// null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn battsched_curve_free(curve: *mut BattschedCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Number of knots in the curve, for introspection.
///
/// # Safety
/// `curve` must be a valid curve handle.
#[no_mangle]
pub unsafe extern "C" fn battsched_curve_knot_count(curve: *const BattschedCurve) -> usize {
    if curve.is_null() {
        return 0;
    }
    (*curve).inner.knots().len()
}

#[allow(clippy::too_many_arguments)]
unsafe fn build_objective(
    battery: *const BattschedBatteryParams,
    curve: *const BattschedCurve,
    eta: f64,
    w_c: f64,
    rho: f64,
    soc_0: f64,
    prices: *const f64,
    horizon: usize,
) -> Result<ObjectiveConfig, BattschedStatus> {
    if battery.is_null() || curve.is_null() || prices.is_null() {
        set_last_error("null pointer argument");
        return Err(BattschedStatus::NullPointer);
    }
    if horizon == 0 {
        set_last_error("horizon must be at least 1");
        return Err(BattschedStatus::InvalidArgument);
    }
    let prices = std::slice::from_raw_parts(prices, horizon).to_vec();
    let scenario = PriceScenario::new(prices, "ffi").map_err(|e| status_for(&e))?;
    let efficiency = EfficiencyParams::new(eta).map_err(|e| status_for(&e))?;
    ObjectiveConfig::new(
        w_c,
        rho,
        soc_0,
        to_battery(&*battery),
        (*curve).inner.clone(),
        efficiency,
        scenario,
    )
    .map_err(|e| status_for(&e))
}

/// Evaluates the weighted objective, its cost and degradation components,
/// and the quadratic penalty for a fixed schedule. Any output pointer may
/// be null to skip that value.
///
/// # Safety
/// `prices` and `powers` must point to `horizon` readable doubles; the
/// handle and struct pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn battsched_evaluate(
    battery: *const BattschedBatteryParams,
    curve: *const BattschedCurve,
    eta: f64,
    w_c: f64,
    rho: f64,
    soc_0: f64,
    prices: *const f64,
    powers: *const f64,
    horizon: usize,
    out_weighted: *mut f64,
    out_cost: *mut f64,
    out_degradation: *mut f64,
    out_penalty: *mut f64,
) -> BattschedStatus {
    guarded(|| {
        let cfg = match build_objective(battery, curve, eta, w_c, rho, soc_0, prices, horizon) {
            Ok(cfg) => cfg,
            Err(status) => return status,
        };
        if powers.is_null() {
            set_last_error("null pointer argument");
            return BattschedStatus::NullPointer;
        }
        let powers = std::slice::from_raw_parts(powers, horizon);
        let value = match cfg.raw_objective(powers) {
            Ok(v) => v,
            Err(e) => return status_for(&e),
        };
        if !out_weighted.is_null() {
            *out_weighted = value.weighted;
        }
        if !out_cost.is_null() {
            *out_cost = value.cost;
        }
        if !out_degradation.is_null() {
            *out_degradation = value.degradation;
        }
        if !out_penalty.is_null() {
            *out_penalty = cfg.quadratic_penalty(powers);
        }
        BattschedStatus::Ok
    })
}

/// Optimizes a charging schedule against the given prices. On success
/// `*out` owns a result handle to be freed with
/// `battsched_optimization_free`.
///
/// # Safety
/// `prices` must point to `horizon` readable doubles; all struct and
/// handle pointers must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn battsched_optimize(
    battery: *const BattschedBatteryParams,
    curve: *const BattschedCurve,
    eta: f64,
    w_c: f64,
    rho: f64,
    soc_0: f64,
    prices: *const f64,
    horizon: usize,
    optimizer: *const BattschedOptimizerParams,
    out: *mut *mut BattschedOptimization,
) -> BattschedStatus {
    guarded(|| {
        if optimizer.is_null() || out.is_null() {
            set_last_error("null pointer argument");
            return BattschedStatus::NullPointer;
        }
        let cfg = match build_objective(battery, curve, eta, w_c, rho, soc_0, prices, horizon) {
            Ok(cfg) => cfg,
            Err(status) => return status,
        };
        let opt = to_optimizer(&*optimizer);
        match optimize_schedule(&cfg, &opt) {
            Ok(result) => {
                let schedule = Schedule {
                    soc_0: cfg.soc_0,
                    powers: result.best_powers.clone(),
                };
                let soc_trajectory = simulate_soc(&schedule, &cfg.battery).values;
                *out = Box::into_raw(Box::new(BattschedOptimization {
                    result,
                    soc_trajectory,
                }));
                BattschedStatus::Ok
            }
            Err(e) => status_for(&e),
        }
    })
}

/// # Safety
/// `opt` must have come from `battsched_optimize` and not been freed
/// already; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn battsched_optimization_free(opt: *mut BattschedOptimization) {
    if !opt.is_null() {
        drop(Box::from_raw(opt));
    }
}

/// Number of intervals in the optimized schedule.
///
/// # Safety
/// `opt` must be a valid result handle.
#[no_mangle]
pub unsafe extern "C" fn battsched_optimization_horizon(
    opt: *const BattschedOptimization,
) -> usize {
    if opt.is_null() {
        return 0;
    }
    (*opt).result.best_powers.len()
}

/// Copies the optimized powers (watts, positive charges) into `buf`.
/// `len` must equal the horizon.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn battsched_optimization_powers(
    opt: *const BattschedOptimization,
    buf: *mut f64,
    len: usize,
) -> BattschedStatus {
    if opt.is_null() || buf.is_null() {
        set_last_error("null pointer argument");
        return BattschedStatus::NullPointer;
    }
    let powers = &(*opt).result.best_powers;
    if len != powers.len() {
        set_last_error("buffer length does not match the horizon");
        return BattschedStatus::LengthMismatch;
    }
    ptr::copy_nonoverlapping(powers.as_ptr(), buf, len);
    BattschedStatus::Ok
}

/// Copies the induced state-of-charge trajectory (percent) into `buf`.
/// `len` must equal horizon + 1; index 0 is the initial state.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn battsched_optimization_soc_trajectory(
    opt: *const BattschedOptimization,
    buf: *mut f64,
    len: usize,
) -> BattschedStatus {
    if opt.is_null() || buf.is_null() {
        set_last_error("null pointer argument");
        return BattschedStatus::NullPointer;
    }
    let trajectory = &(*opt).soc_trajectory;
    if len != trajectory.len() {
        set_last_error("buffer length does not match horizon + 1");
        return BattschedStatus::LengthMismatch;
    }
    ptr::copy_nonoverlapping(trajectory.as_ptr(), buf, len);
    BattschedStatus::Ok
}

/// Unpenalized cost in dollars at the optimized schedule (negative is
/// revenue). NaN for a null handle.
///
/// # Safety
/// `opt` must be a valid result handle or null.
#[no_mangle]
pub unsafe extern "C" fn battsched_optimization_cost(opt: *const BattschedOptimization) -> f64 {
    if opt.is_null() {
        return f64::NAN;
    }
    (*opt).result.raw_cost
}

/// Unpenalized total degradation at the optimized schedule.
///
/// # Safety
/// `opt` must be a valid result handle or null.
#[no_mangle]
pub unsafe extern "C" fn battsched_optimization_degradation(
    opt: *const BattschedOptimization,
) -> f64 {
    if opt.is_null() {
        return f64::NAN;
    }
    (*opt).result.raw_degradation
}

/// Quadratic penalty (unscaled by rho) at the optimized schedule.
///
/// # Safety
/// `opt` must be a valid result handle or null.
#[no_mangle]
pub unsafe extern "C" fn battsched_optimization_penalty(
    opt: *const BattschedOptimization,
) -> f64 {
    if opt.is_null() {
        return f64::NAN;
    }
    (*opt).result.penalty
}

/// Whether the optimized schedule satisfies the constraints within the
/// library's feasibility tolerance.
///
/// # Safety
/// `opt` must be a valid result handle or null.
#[no_mangle]
pub unsafe extern "C" fn battsched_optimization_feasible(
    opt: *const BattschedOptimization,
) -> bool {
    if opt.is_null() {
        return false;
    }
    (*opt).result.feasible
}
