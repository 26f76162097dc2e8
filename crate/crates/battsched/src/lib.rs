//! Battery charge-schedule optimization.
//!
//! Computes lithium-ion charging/discharging schedules that minimize a
//! weighted blend of energy cost and battery degradation. The degradation
//! model combines a cumulative degradation curve over state of charge with
//! a current-dependent scaling factor; constraints are handled with a
//! quadratic penalty and the search runs central-difference Nesterov
//! momentum descent from random restarts. A Gaussian-process forecaster
//! turns hourly usage history into price scenarios, and a cost-weight
//! sweep assembles the cost/degradation Pareto frontier.
//!
//! ```
//! use battsched::battery::{BatteryParams, DegradationCurve};
//! use battsched::cost::{EfficiencyParams, PriceScenario};
//! use battsched::objective::ObjectiveConfig;
//! use battsched::optimizer::{optimize_schedule, OptimizerConfig};
//!
//! let cfg = ObjectiveConfig::new(
//!     0.0,
//!     1000.0,
//!     80.0,
//!     BatteryParams::default(),
//!     DegradationCurve::synthetic_default(),
//!     EfficiencyParams::default(),
//!     PriceScenario::constant(0.10, 12, "flat").unwrap(),
//! )
//! .unwrap();
//! let opt = OptimizerConfig::default();
//! let result = optimize_schedule(&cfg, &opt).unwrap();
//! assert!(result.feasible);
//! assert!(result.raw_degradation < 1e-6);
//! ```

pub mod battery;
pub mod cli;
pub mod cost;
pub mod error;
pub mod forecast;
pub mod io;
pub mod objective;
pub mod optimizer;
pub mod pareto;

pub use error::{Error, Result};
