//! Monetary cost of a schedule against a price scenario.
//!
//! Costs are computed from market-side power: charging draws more from the
//! market than the battery stores, discharging delivers less than the
//! battery releases. Negative total cost is revenue.

use serde::{Deserialize, Serialize};

use crate::battery::{BatteryParams, Schedule};
use crate::error::{Error, Result};

/// Watt-hours per kilowatt-hour; the only place the unit conversion lives.
pub const WH_PER_KWH: f64 = 1000.0;

/// Per-interval energy prices in dollars per kWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceScenario {
    pub prices: Vec<f64>,
    pub label: String,
}

impl PriceScenario {
    /// Negative prices are permitted (real markets have them) but callers
    /// should surface [`PriceScenario::has_negative`] as a warning.
    pub fn new(prices: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if prices.is_empty() {
            return Err(Error::invalid("price scenario", "needs at least one price"));
        }
        if let Some(i) = prices.iter().position(|p| !p.is_finite()) {
            return Err(Error::invalid(
                "price scenario",
                format!("price at hour {i} is not finite"),
            ));
        }
        Ok(PriceScenario {
            prices,
            label: label.into(),
        })
    }

    pub fn constant(price: f64, horizon: usize, label: impl Into<String>) -> Result<Self> {
        PriceScenario::new(vec![price; horizon], label)
    }

    pub fn horizon(&self) -> usize {
        self.prices.len()
    }

    pub fn has_negative(&self) -> bool {
        self.prices.iter().any(|&p| p < 0.0)
    }
}

/// Round-trip inefficiency factor relating battery-side and market-side power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyParams {
    pub eta: f64,
}

impl Default for EfficiencyParams {
    fn default() -> Self {
        EfficiencyParams { eta: 0.95 }
    }
}

impl EfficiencyParams {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::invalid(
                "efficiency",
                format!("eta must be in (0, 1], got {eta}"),
            ));
        }
        Ok(EfficiencyParams { eta })
    }
}

/// Market-side power for a given battery-side power. Charging buys more
/// than the battery stores (`p_b / eta`); discharging sells less than the
/// battery releases (`p_b * eta`).
pub fn market_power(p_b: f64, eff: &EfficiencyParams) -> f64 {
    if p_b > 0.0 {
        p_b / eff.eta
    } else {
        p_b * eff.eta
    }
}

/// Cost of one interval in dollars.
pub(crate) fn interval_cost(
    p_b: f64,
    price: f64,
    eff: &EfficiencyParams,
    params: &BatteryParams,
) -> f64 {
    market_power(p_b, eff) * params.delta_t * price / WH_PER_KWH
}

/// Total cost of the schedule in dollars; negative values are revenue.
pub fn total_cost(
    schedule: &Schedule,
    scenario: &PriceScenario,
    eff: &EfficiencyParams,
    params: &BatteryParams,
) -> Result<f64> {
    if schedule.horizon() != scenario.horizon() {
        return Err(Error::HorizonMismatch {
            powers: schedule.horizon(),
            prices: scenario.horizon(),
        });
    }
    Ok(schedule
        .powers
        .iter()
        .zip(&scenario.prices)
        .map(|(&p, &price)| interval_cost(p, price, eff, params))
        .sum())
}
