//! Cost-weight sweeps and Pareto-frontier assembly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::ObjectiveConfig;
use crate::optimizer::{derive_seed, optimize_schedule, OptimizerConfig};

/// One optimized point of a cost-weight sweep. `cost` and `degradation`
/// are the raw components at the returned schedule, never the weighted or
/// penalized objective.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub w_c: f64,
    pub cost: f64,
    pub degradation: f64,
    pub powers: Vec<f64>,
    pub feasible: bool,
    /// Present when the optimizer failed for this weight; such points
    /// carry NaN components and never join the frontier.
    pub error: Option<String>,
}

impl FrontierPoint {
    fn failed(w_c: f64, error: String) -> Self {
        FrontierPoint {
            w_c,
            cost: f64::NAN,
            degradation: f64::NAN,
            powers: Vec::new(),
            feasible: false,
            error: Some(error),
        }
    }

    pub fn is_usable(&self) -> bool {
        self.error.is_none() && self.cost.is_finite() && self.degradation.is_finite()
    }
}

/// Evenly spaced weights across [0, 1].
pub fn weight_grid(count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![0.0];
    }
    (0..count)
        .map(|i| i as f64 / (count as f64 - 1.0))
        .collect()
}

/// Run one optimization per weight, each with a seed derived from the
/// master seed and the weight index, and return the points in weight
/// order. Per-weight optimizer failures are recorded on the point rather
/// than aborting the sweep.
pub fn sweep(
    weights: &[f64],
    base: &ObjectiveConfig,
    opt: &OptimizerConfig,
) -> Result<Vec<FrontierPoint>> {
    for &w in weights {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::invalid(
                "sweep",
                format!("weights must lie in [0, 1], got {w}"),
            ));
        }
    }

    let run_weight = |(i, &w_c): (usize, &f64)| -> FrontierPoint {
        let cfg = match base.with_w_c(w_c) {
            Ok(cfg) => cfg,
            Err(e) => return FrontierPoint::failed(w_c, e.to_string()),
        };
        let weight_opt = OptimizerConfig {
            seed: derive_seed(opt.seed, i as u64),
            ..opt.clone()
        };
        match optimize_schedule(&cfg, &weight_opt) {
            Ok(result) => FrontierPoint {
                w_c,
                cost: result.raw_cost,
                degradation: result.raw_degradation,
                powers: result.best_powers,
                feasible: result.feasible,
                error: None,
            },
            Err(e) => FrontierPoint::failed(w_c, e.to_string()),
        }
    };

    let points = if opt.parallel {
        weights.par_iter().enumerate().map(run_weight).collect()
    } else {
        weights.iter().enumerate().map(run_weight).collect()
    };
    Ok(points)
}

fn dominates(a: &FrontierPoint, b: &FrontierPoint) -> bool {
    a.cost <= b.cost
        && a.degradation <= b.degradation
        && (a.cost < b.cost || a.degradation < b.degradation)
}

/// Per-point dominance flags, aligned with the input order. Failed points
/// are marked dominated and never dominate anything.
pub fn dominance_flags(points: &[FrontierPoint]) -> Vec<bool> {
    points
        .iter()
        .map(|p| {
            if !p.is_usable() {
                return true;
            }
            points
                .iter()
                .any(|q| q.is_usable() && !std::ptr::eq(p, q) && dominates(q, p))
        })
        .collect()
}

/// The non-dominated subset: points for which no other point is at least
/// as good in both objectives and strictly better in one. Exact ties are
/// kept. Output is ordered by cost ascending (stable for equal costs).
pub fn non_dominated(points: &[FrontierPoint]) -> Vec<FrontierPoint> {
    let flags = dominance_flags(points);
    let mut frontier: Vec<FrontierPoint> = points
        .iter()
        .zip(&flags)
        .filter(|(_, &dominated)| !dominated)
        .map(|(p, _)| p.clone())
        .collect();
    frontier.sort_by(|a, b| a.cost.partial_cmp(&b.cost).expect("usable points are finite"));
    frontier
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::battery::{BatteryParams, DegradationCurve};
    use crate::cost::{EfficiencyParams, PriceScenario};
    use proptest::prelude::*;

    fn point(cost: f64, degradation: f64) -> FrontierPoint {
        FrontierPoint {
            w_c: 0.5,
            cost,
            degradation,
            powers: vec![],
            feasible: true,
            error: None,
        }
    }

    #[test]
    fn strict_dominance_filters() {
        let pts = vec![point(1.0, 1.0), point(2.0, 2.0)];
        let frontier = non_dominated(&pts);
        assert_eq!(frontier.len(), 1);
        assert_eq!(frontier[0].cost, 1.0);
    }

    #[test]
    fn mutually_non_dominated_points_all_survive() {
        let pts = vec![point(1.0, 3.0), point(3.0, 1.0), point(2.0, 2.0)];
        let frontier = non_dominated(&pts);
        assert_eq!(frontier.len(), 3);
        // Ordered by cost ascending.
        assert_eq!(frontier[0].cost, 1.0);
        assert_eq!(frontier[2].cost, 3.0);
    }

    #[test]
    fn duplicates_are_both_retained() {
        let pts = vec![point(1.0, 1.0), point(1.0, 1.0)];
        assert_eq!(non_dominated(&pts).len(), 2);
    }

    #[test]
    fn failed_points_never_join_the_frontier() {
        let pts = vec![point(1.0, 1.0), FrontierPoint::failed(0.5, "boom".into())];
        let flags = dominance_flags(&pts);
        assert_eq!(flags, vec![false, true]);
        assert_eq!(non_dominated(&pts).len(), 1);
    }

    #[test]
    fn weight_grid_is_even_and_inclusive() {
        let grid = weight_grid(21);
        assert_eq!(grid.len(), 21);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[20], 1.0);
        assert!((grid[10] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_weight_list_gives_empty_sweep() {
        let base = base_config(3);
        let opt = OptimizerConfig {
            max_iters: 10,
            n_restarts: 1,
            ..OptimizerConfig::default()
        };
        assert!(sweep(&[], &base, &opt).unwrap().is_empty());
    }

    #[test]
    fn out_of_range_weight_is_rejected() {
        let base = base_config(3);
        let opt = OptimizerConfig::default();
        assert!(sweep(&[0.5, 1.2], &base, &opt).is_err());
    }

    fn base_config(horizon: usize) -> ObjectiveConfig {
        ObjectiveConfig::new(
            0.5,
            1000.0,
            50.0,
            BatteryParams::default(),
            DegradationCurve::synthetic_default(),
            EfficiencyParams::default(),
            PriceScenario::constant(0.10, horizon, "flat").unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let base = base_config(3);
        let opt = OptimizerConfig {
            max_iters: 120,
            n_restarts: 2,
            seed: 5,
            ..OptimizerConfig::default()
        };
        let weights = [0.0, 0.5, 1.0];
        let a = sweep(&weights, &base, &opt).unwrap();
        let b = sweep(&weights, &base, &opt).unwrap();
        assert_eq!(a.len(), 3);
        for (pa, pb) in a.iter().zip(&b) {
            assert_eq!(pa.w_c, pb.w_c);
            assert_eq!(pa.powers, pb.powers);
            assert_eq!(pa.cost.to_bits(), pb.cost.to_bits());
        }
        assert_eq!(a[0].w_c, 0.0);
        assert_eq!(a[2].w_c, 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Applying the dominance filter twice changes nothing, and every
        /// input point is either kept or dominated by a kept point.
        #[test]
        fn non_dominated_is_idempotent_and_covering(
            coords in proptest::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..40),
        ) {
            let pts: Vec<FrontierPoint> = coords.iter().map(|&(c, d)| point(c, d)).collect();
            let once = non_dominated(&pts);
            let twice = non_dominated(&once);
            prop_assert_eq!(once.len(), twice.len());
            for (a, b) in once.iter().zip(&twice) {
                prop_assert_eq!(a.cost, b.cost);
                prop_assert_eq!(a.degradation, b.degradation);
            }
            for p in &pts {
                let kept = once
                    .iter()
                    .any(|q| q.cost == p.cost && q.degradation == p.degradation);
                let covered = once.iter().any(|q| dominates(q, p));
                prop_assert!(kept || covered);
            }
        }
    }
}
