/* C interface for the battsched battery-scheduling library. */

#ifndef BATTSCHED_H
#define BATTSCHED_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible function.
typedef enum BattschedStatus {
  BATTSCHED_STATUS_OK = 0,
  // A required pointer argument was null.
  BATTSCHED_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  BATTSCHED_STATUS_INVALID_UTF8 = 2,
  // A parameter violated its documented range or invariant.
  BATTSCHED_STATUS_INVALID_ARGUMENT = 3,
  // A file failed to read or parse.
  BATTSCHED_STATUS_PARSE_ERROR = 4,
  // Buffer or length arguments do not match the data.
  BATTSCHED_STATUS_LENGTH_MISMATCH = 5,
  // Optimization or factorization failed numerically.
  BATTSCHED_STATUS_NUMERICAL_ERROR = 6,
  // The library panicked internally; state is still consistent.
  BATTSCHED_STATUS_INTERNAL_PANIC = 7,
} BattschedStatus;

// Opaque handle to a validated degradation curve.
typedef struct BattschedCurve BattschedCurve;

// Opaque handle to a finished optimization.
typedef struct BattschedOptimization BattschedOptimization;

// Battery constants; see `battsched_battery_params_default` for the
// stock cell values.
typedef struct BattschedBatteryParams {
  // Trading-interval length in hours.
  double delta_t;
  // Nominal voltage in volts.
  double v_nom;
  // 1C current in amperes.
  double i_1c;
  // Power magnitude cap in watts.
  double p_b_max;
} BattschedBatteryParams;

// Optimizer settings; see `battsched_optimizer_params_default`.
typedef struct BattschedOptimizerParams {
  // Dimensionless descent rate when `auto_scale` is true, otherwise a
  // raw step length.
  double step_size;
  // Momentum factor in [0, 1).
  double momentum;
  // Central-difference step in watts.
  double fd_step;
  size_t max_iters;
  size_t n_restarts;
  // Uniform initialization range for restart starting points.
  double init_lo;
  double init_hi;
  uint64_t seed;
  bool auto_scale;
} BattschedOptimizerParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *battsched_version(void);

// Copies the most recent error message for this thread into `buf`
// (truncated, always NUL-terminated when `cap > 0`) and returns the full
// message length in bytes, excluding the terminator.
//
// # Safety
// `buf` must point to at least `cap` writable bytes, or be null with
// `cap == 0` to query the length alone.
size_t battsched_last_error_message(char *buf, size_t cap);

// Stock battery constants: 1 h intervals, 3.7 V, 2.15 A at 1C, 5 W cap.
struct BattschedBatteryParams battsched_battery_params_default(void);

// Stock optimizer settings (matching the library defaults).
struct BattschedOptimizerParams battsched_optimizer_params_default(void);

// The built-in synthetic degradation curve. Never fails; free with
// `battsched_curve_free`.
struct BattschedCurve *battsched_curve_default(void);

// Loads a degradation curve from a CSV file with header
// `soc_percent,cumulative_degradation`.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer; on
// success `*out` owns a curve that must be freed with
// `battsched_curve_free`.
enum BattschedStatus battsched_curve_load(const char *path, struct BattschedCurve **out);

// # Safety
// `curve` must have come from this library and not been freed already;
// null is a no-op.
void battsched_curve_free(struct BattschedCurve *curve);

// Number of knots in the curve, for introspection.
//
// # Safety
// `curve` must be a valid curve handle.
size_t battsched_curve_knot_count(const struct BattschedCurve *curve);

// Evaluates the weighted objective, its cost and degradation components,
// and the quadratic penalty for a fixed schedule. Any output pointer may
// be null to skip that value.
//
// # Safety
// `prices` and `powers` must point to `horizon` readable doubles; the
// handle and struct pointers must be valid.
enum BattschedStatus battsched_evaluate(const struct BattschedBatteryParams *battery,
                                        const struct BattschedCurve *curve,
                                        double eta,
                                        double w_c,
                                        double rho,
                                        double soc_0,
                                        const double *prices,
                                        const double *powers,
                                        size_t horizon,
                                        double *out_weighted,
                                        double *out_cost,
                                        double *out_degradation,
                                        double *out_penalty);

// Optimizes a charging schedule against the given prices. On success
// `*out` owns a result handle to be freed with
// `battsched_optimization_free`.
//
// # Safety
// `prices` must point to `horizon` readable doubles; all struct and
// handle pointers must be valid; `out` must be writable.
enum BattschedStatus battsched_optimize(const struct BattschedBatteryParams *battery,
                                        const struct BattschedCurve *curve,
                                        double eta,
                                        double w_c,
                                        double rho,
                                        double soc_0,
                                        const double *prices,
                                        size_t horizon,
                                        const struct BattschedOptimizerParams *optimizer,
                                        struct BattschedOptimization **out);

// # Safety
// `opt` must have come from `battsched_optimize` and not been freed
// already; null is a no-op.
void battsched_optimization_free(struct BattschedOptimization *opt);

// Number of intervals in the optimized schedule.
//
// # Safety
// `opt` must be a valid result handle.
size_t battsched_optimization_horizon(const struct BattschedOptimization *opt);

// Copies the optimized powers (watts, positive charges) into `buf`.
// `len` must equal the horizon.
//
// # Safety
// `buf` must point to `len` writable doubles.
enum BattschedStatus battsched_optimization_powers(const struct BattschedOptimization *opt,
                                                   double *buf,
                                                   size_t len);

// Copies the induced state-of-charge trajectory (percent) into `buf`.
// `len` must equal horizon + 1; index 0 is the initial state.
//
// # Safety
// `buf` must point to `len` writable doubles.
enum BattschedStatus battsched_optimization_soc_trajectory(const struct BattschedOptimization *opt,
                                                           double *buf,
                                                           size_t len);

// Unpenalized cost in dollars at the optimized schedule (negative is
// revenue). NaN for a null handle.
//
// # Safety
// `opt` must be a valid result handle or null.
double battsched_optimization_cost(const struct BattschedOptimization *opt);

// Unpenalized total degradation at the optimized schedule.
//
// # Safety
// `opt` must be a valid result handle or null.
double battsched_optimization_degradation(const struct BattschedOptimization *opt);

// Quadratic penalty (unscaled by rho) at the optimized schedule.
//
// # Safety
// `opt` must be a valid result handle or null.
double battsched_optimization_penalty(const struct BattschedOptimization *opt);

// Whether the optimized schedule satisfies the constraints within the
// library's feasibility tolerance.
//
// # Safety
// `opt` must be a valid result handle or null.
bool battsched_optimization_feasible(const struct BattschedOptimization *opt);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BATTSCHED_H */
