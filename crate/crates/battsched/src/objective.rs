//! The scalar function the optimizer minimizes: a cost/degradation blend
//! plus a quadratic penalty on constraint violations.

use serde::{Deserialize, Serialize};

use crate::battery::{self, BatteryParams, DegradationCurve};
use crate::cost::{self, EfficiencyParams, PriceScenario};
use crate::error::{Error, Result};

/// Everything needed to evaluate the objective for one problem instance.
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    /// Cost weight in [0, 1]; degradation gets `1 - w_c`.
    pub w_c: f64,
    /// Penalty scaling factor, >= 0.
    pub rho: f64,
    /// Initial state of charge in percent.
    pub soc_0: f64,
    pub battery: BatteryParams,
    pub curve: DegradationCurve,
    pub efficiency: EfficiencyParams,
    pub scenario: PriceScenario,
}

/// Raw (unpenalized) objective value with its components, for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    /// `w_c * cost + (1 - w_c) * degradation`.
    pub weighted: f64,
    /// Total cost in dollars (negative is revenue).
    pub cost: f64,
    /// Total degradation, dimensionless.
    pub degradation: f64,
}

impl ObjectiveConfig {
    pub fn new(
        w_c: f64,
        rho: f64,
        soc_0: f64,
        battery: BatteryParams,
        curve: DegradationCurve,
        efficiency: EfficiencyParams,
        scenario: PriceScenario,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&w_c) {
            return Err(Error::invalid(
                "objective",
                format!("w_c must be in [0, 1], got {w_c}"),
            ));
        }
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::invalid(
                "objective",
                format!("rho must be finite and >= 0, got {rho}"),
            ));
        }
        if !(0.0..=100.0).contains(&soc_0) {
            return Err(Error::invalid(
                "objective",
                format!("soc_0 must be within [0, 100] %, got {soc_0}"),
            ));
        }
        battery.validate()?;
        Ok(ObjectiveConfig {
            w_c,
            rho,
            soc_0,
            battery,
            curve,
            efficiency,
            scenario,
        })
    }

    pub fn horizon(&self) -> usize {
        self.scenario.horizon()
    }

    pub fn with_w_c(&self, w_c: f64) -> Result<Self> {
        let mut cfg = self.clone();
        if !(0.0..=1.0).contains(&w_c) {
            return Err(Error::invalid(
                "objective",
                format!("w_c must be in [0, 1], got {w_c}"),
            ));
        }
        cfg.w_c = w_c;
        Ok(cfg)
    }

    /// Weighted objective plus its raw components, without the penalty.
    pub fn raw_objective(&self, powers: &[f64]) -> Result<ObjectiveValue> {
        if powers.len() != self.horizon() {
            return Err(Error::HorizonMismatch {
                powers: powers.len(),
                prices: self.horizon(),
            });
        }
        let mut cost = 0.0;
        let mut degradation = 0.0;
        let mut soc = self.soc_0;
        for (&p, &price) in powers.iter().zip(&self.scenario.prices) {
            let next = battery::soc_step(soc, p, &self.battery);
            cost += cost::interval_cost(p, price, &self.efficiency, &self.battery);
            degradation += battery::step_degradation(soc, next, p, &self.curve, &self.battery);
            soc = next;
        }
        Ok(ObjectiveValue {
            weighted: self.w_c * cost + (1.0 - self.w_c) * degradation,
            cost,
            degradation,
        })
    }

    /// Sum of squared violations of the SOC bounds and the power magnitude
    /// cap, over the unclamped trajectory.
    pub fn quadratic_penalty(&self, powers: &[f64]) -> f64 {
        let b = &self.battery;
        let mut penalty = 0.0;
        let mut soc = self.soc_0;
        for &p in powers {
            soc = battery::soc_step(soc, p, b);
            penalty += (soc - b.soc_max).max(0.0).powi(2);
            penalty += soc.min(b.soc_min).powi(2);
            penalty += (p.abs() - b.p_b_max).max(0.0).powi(2);
        }
        penalty
    }

    /// Raw objective plus `rho` times the quadratic penalty.
    pub fn penalized_objective(&self, powers: &[f64]) -> Result<f64> {
        Ok(self.raw_objective(powers)?.weighted + self.rho * self.quadratic_penalty(powers))
    }

    /// Largest single constraint violation in percent SOC or watts.
    pub fn max_violation(&self, powers: &[f64]) -> f64 {
        let b = &self.battery;
        let mut worst: f64 = 0.0;
        let mut soc = self.soc_0;
        for &p in powers {
            worst = worst.max(p.abs() - b.p_b_max);
            soc = battery::soc_step(soc, p, b);
            worst = worst.max(soc - b.soc_max).max(b.soc_min - soc);
        }
        worst.max(0.0)
    }
}
