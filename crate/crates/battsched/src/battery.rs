//! Battery physics and the empirical degradation model.
//!
//! State of charge is tracked in percent (0–100). Power is signed watts:
//! positive charges the battery, negative discharges it. Degradation per
//! interval is the 1C degradation increment read off a cumulative
//! degradation curve, scaled by a current-dependent factor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scaling factor measured at a current rate of 2C. Together with the
/// anchors at 0C (zero) and 1C (one) it fixes the piecewise-linear shape
/// of [`psi`].
pub const PSI_AT_2C: f64 = 1.2956;

/// Physical battery constants and state-of-charge bounds.
///
/// Defaults describe the studied cell: 1-hour trading intervals, 3.7 V
/// nominal voltage, 2.15 A at 1C, and a 5 W charge/discharge cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryParams {
    /// Trading-interval length in hours.
    pub delta_t: f64,
    /// Nominal operating voltage in volts, assumed constant.
    pub v_nom: f64,
    /// 1C current in amperes.
    pub i_1c: f64,
    /// Maximum charge/discharge power magnitude in watts.
    pub p_b_max: f64,
    /// Lower state-of-charge bound in percent.
    pub soc_min: f64,
    /// Upper state-of-charge bound in percent.
    pub soc_max: f64,
}

impl Default for BatteryParams {
    fn default() -> Self {
        BatteryParams {
            delta_t: 1.0,
            v_nom: 3.7,
            i_1c: 2.15,
            p_b_max: 5.0,
            soc_min: 0.0,
            soc_max: 100.0,
        }
    }
}

impl BatteryParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_t > 0.0 && self.delta_t.is_finite()) {
            return Err(Error::invalid("battery params", "delta_t must be > 0"));
        }
        if !(self.v_nom > 0.0 && self.v_nom.is_finite()) {
            return Err(Error::invalid("battery params", "v_nom must be > 0"));
        }
        if !(self.i_1c > 0.0 && self.i_1c.is_finite()) {
            return Err(Error::invalid("battery params", "i_1c must be > 0"));
        }
        if !(self.p_b_max > 0.0 && self.p_b_max.is_finite()) {
            return Err(Error::invalid("battery params", "p_b_max must be > 0"));
        }
        if self.soc_min != 0.0 || self.soc_max != 100.0 {
            return Err(Error::invalid(
                "battery params",
                "state of charge is on the percent scale: soc_min must be 0 and soc_max 100",
            ));
        }
        Ok(())
    }

    /// Percent of state of charge moved by one watt over one interval.
    pub fn soc_per_watt(&self) -> f64 {
        100.0 * self.delta_t / (self.v_nom * self.i_1c)
    }
}

/// Piecewise-linear cumulative degradation as a function of state of charge.
///
/// Knots are `(soc_percent, cumulative_degradation)` pairs. The curve must
/// start at 0 % and end at 100 % with strictly increasing SOC values and
/// non-decreasing degradation values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationCurve {
    knots: Vec<(f64, f64)>,
}

impl DegradationCurve {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::invalid(
                "degradation curve",
                format!("needs at least 2 knots, got {}", knots.len()),
            ));
        }
        for (i, &(soc, delta)) in knots.iter().enumerate() {
            if !soc.is_finite() || !delta.is_finite() {
                return Err(Error::invalid(
                    "degradation curve",
                    format!("knot {i} is not finite"),
                ));
            }
            if delta < 0.0 {
                return Err(Error::invalid(
                    "degradation curve",
                    format!("knot {i} has negative cumulative degradation {delta}"),
                ));
            }
        }
        for (i, pair) in knots.windows(2).enumerate() {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::invalid(
                    "degradation curve",
                    format!(
                        "soc values must be strictly increasing, but knot {} ({}) <= knot {} ({})",
                        i + 1,
                        pair[1].0,
                        i,
                        pair[0].0
                    ),
                ));
            }
            if pair[1].1 < pair[0].1 {
                return Err(Error::invalid(
                    "degradation curve",
                    format!(
                        "cumulative degradation must be non-decreasing, but knot {} ({}) < knot {} ({})",
                        i + 1,
                        pair[1].1,
                        i,
                        pair[0].1
                    ),
                ));
            }
        }
        if knots[0].0 != 0.0 || knots[knots.len() - 1].0 != 100.0 {
            return Err(Error::invalid(
                "degradation curve",
                format!(
                    "knots must cover [0, 100] %, got [{}, {}]",
                    knots[0].0,
                    knots[knots.len() - 1].0
                ),
            ));
        }
        Ok(DegradationCurve { knots })
    }

    /// Synthetic default curve: zero at 0 % SOC, one at 100 %, with a slope
    /// that is steepest near both ends of the SOC range and flattest in the
    /// middle. This is an illustrative placeholder, not measured cell data;
    /// load a measured curve from CSV for real studies.
    pub fn synthetic_default() -> Self {
        let knots = (0..=20)
            .map(|k| {
                let u = k as f64 / 20.0;
                let w = 2.0 * u - 1.0;
                // Integral of the weight 1 + 4*(2u-1)^2, normalized to [0, 1].
                let delta = (3.0 * u + 2.0 * (w * w * w + 1.0)) / 7.0;
                (5.0 * k as f64, delta)
            })
            .collect();
        DegradationCurve::new(knots).expect("synthetic default curve is valid")
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// Cumulative degradation at `soc`, clamping the input to [0, 100]
    /// before the piecewise-linear lookup.
    pub fn interp(&self, soc: f64) -> f64 {
        let soc = soc.clamp(0.0, 100.0);
        let idx = self.knots.partition_point(|&(s, _)| s <= soc);
        if idx == 0 {
            return self.knots[0].1;
        }
        if idx == self.knots.len() {
            return self.knots[self.knots.len() - 1].1;
        }
        let (s0, d0) = self.knots[idx - 1];
        let (s1, d1) = self.knots[idx];
        d0 + (d1 - d0) * (soc - s0) / (s1 - s0)
    }
}

/// A charging schedule: an initial state of charge plus one signed power
/// value per trading interval. Infeasible schedules are representable on
/// purpose; feasibility is a predicate, not a construction invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// Initial state of charge in percent.
    pub soc_0: f64,
    /// Battery-side power per interval in watts; positive charges.
    pub powers: Vec<f64>,
}

impl Schedule {
    pub fn new(soc_0: f64, powers: Vec<f64>) -> Result<Self> {
        if !(0.0..=100.0).contains(&soc_0) {
            return Err(Error::invalid(
                "schedule",
                format!("initial state of charge must be within [0, 100] %, got {soc_0}"),
            ));
        }
        if powers.is_empty() {
            return Err(Error::invalid("schedule", "needs at least one interval"));
        }
        if let Some(i) = powers.iter().position(|p| !p.is_finite()) {
            return Err(Error::invalid(
                "schedule",
                format!("power at interval {i} is not finite"),
            ));
        }
        Ok(Schedule { soc_0, powers })
    }

    pub fn horizon(&self) -> usize {
        self.powers.len()
    }

    /// Largest constraint violation in percent SOC or watts: power beyond
    /// the magnitude cap, or induced SOC outside [soc_min, soc_max].
    pub fn feasibility_violation(&self, params: &BatteryParams) -> f64 {
        let mut worst: f64 = 0.0;
        let mut soc = self.soc_0;
        for &p in &self.powers {
            worst = worst.max(p.abs() - params.p_b_max);
            soc = soc_step(soc, p, params);
            worst = worst.max(soc - params.soc_max).max(params.soc_min - soc);
        }
        worst.max(0.0)
    }

    pub fn is_feasible(&self, params: &BatteryParams, tol: f64) -> bool {
        self.feasibility_violation(params) <= tol
    }
}

/// State-of-charge trajectory induced by a schedule; `values[0]` is the
/// initial state of charge, so the length is one more than the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocTrajectory {
    pub values: Vec<f64>,
}

impl SocTrajectory {
    pub fn final_soc(&self) -> f64 {
        *self.values.last().expect("trajectory is never empty")
    }
}

/// One state-of-charge update. The result is deliberately not clamped:
/// the quadratic penalty needs to observe violation magnitudes.
pub fn soc_step(soc_prev: f64, p_b: f64, params: &BatteryParams) -> f64 {
    soc_prev + 100.0 * (p_b * params.delta_t) / (params.v_nom * params.i_1c)
}

/// Fold [`soc_step`] over the whole schedule.
pub fn simulate_soc(schedule: &Schedule, params: &BatteryParams) -> SocTrajectory {
    let mut values = Vec::with_capacity(schedule.powers.len() + 1);
    let mut soc = schedule.soc_0;
    values.push(soc);
    for &p in &schedule.powers {
        soc = soc_step(soc, p, params);
        values.push(soc);
    }
    SocTrajectory { values }
}

/// Operating current normalized by the 1C current. Sign is discarded.
pub fn current_rate(p_b: f64, params: &BatteryParams) -> f64 {
    p_b.abs() / (params.v_nom * params.i_1c)
}

/// Current-dependent degradation scaling factor.
///
/// Zero at idle, equal to the current rate up to 1C, then linear through
/// the measured anchor [`PSI_AT_2C`] at 2C and extrapolated with the same
/// slope beyond.
///
/// Panics if `i` is negative; current rates are magnitudes by construction.
pub fn psi(i: f64) -> f64 {
    assert!(i >= 0.0, "current rate must be non-negative, got {i}");
    if i <= 1.0 {
        i
    } else {
        1.0 + (PSI_AT_2C - 1.0) * (i - 1.0)
    }
}

/// Degradation increment at 1C between two states of charge: the absolute
/// difference of the cumulative curve at the two (clamped) endpoints.
pub fn d1c(soc_from: f64, soc_to: f64, curve: &DegradationCurve) -> f64 {
    (curve.interp(soc_to) - curve.interp(soc_from)).abs()
}

/// Degradation incurred over one interval: the 1C increment scaled by the
/// current factor. Algebraically `((d + psi)/2)^2 - ((d - psi)/2)^2` equals
/// `d * psi`; the product form is used here and tests hold the two forms
/// against each other.
pub fn step_degradation(
    soc_from: f64,
    soc_to: f64,
    p_b: f64,
    curve: &DegradationCurve,
    params: &BatteryParams,
) -> f64 {
    d1c(soc_from, soc_to, curve) * psi(current_rate(p_b, params))
}

/// Total degradation: the sum of per-interval degradation along the
/// simulated trajectory.
pub fn total_degradation(
    schedule: &Schedule,
    curve: &DegradationCurve,
    params: &BatteryParams,
) -> f64 {
    let traj = simulate_soc(schedule, params);
    schedule
        .powers
        .iter()
        .zip(traj.values.windows(2))
        .map(|(&p, pair)| step_degradation(pair[0], pair[1], p, curve, params))
        .sum()
}
