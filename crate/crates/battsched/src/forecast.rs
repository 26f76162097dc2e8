//! Gaussian-process forecasting of hourly energy usage and its conversion
//! into price scenarios.
//!
//! The model conditions a locally periodic kernel (daily period times a
//! squared-exponential envelope) on a window of hourly usage history, with
//! an hour-of-day seasonal mean. Posterior samples are smoothed with a
//! polynomial fit and scaled into prices by a supply-and-demand constant.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cost::PriceScenario;
use crate::error::{Error, Result};

/// Divisor converting MW of usage into dollars per kWh.
pub const SUPPLY_DEMAND_SCALE: f64 = 80_000.0;

/// Relative jitter added to covariance diagonals before factorization,
/// as a fraction of the prior variance.
pub const BASE_JITTER_FRACTION: f64 = 1e-6;

/// Jitter escalations allowed before factorization gives up.
const MAX_JITTER_ESCALATIONS: usize = 3;

/// Hourly usage history: integer hour indices with MW values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlySeries {
    pub hours: Vec<i64>,
    pub values: Vec<f64>,
}

impl HourlySeries {
    pub fn new(hours: Vec<i64>, values: Vec<f64>) -> Result<Self> {
        if hours.is_empty() || hours.len() != values.len() {
            return Err(Error::invalid(
                "hourly series",
                format!(
                    "hours and values must be equal-length and non-empty, got {} and {}",
                    hours.len(),
                    values.len()
                ),
            ));
        }
        if let Some(i) = hours.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "hourly series",
                format!("hours must be strictly increasing, violated at index {}", i + 1),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(
                "hourly series",
                format!("values must be finite and >= 0, violated at index {i}"),
            ));
        }
        Ok(HourlySeries { hours, values })
    }

    pub fn len(&self) -> usize {
        self.hours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hours.is_empty()
    }

    /// The trailing `window` entries (or everything, if shorter).
    pub fn tail(&self, window: usize) -> HourlySeries {
        let start = self.len().saturating_sub(window);
        HourlySeries {
            hours: self.hours[start..].to_vec(),
            values: self.values[start..].to_vec(),
        }
    }

    pub fn last_hour(&self) -> i64 {
        *self.hours.last().expect("series is never empty")
    }
}

/// Hyperparameters of the locally periodic kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Squared-exponential length scale in hours.
    pub l_exp: f64,
    /// Periodic length scale, dimensionless.
    pub l_per: f64,
    /// Period in hours.
    pub rho_period: f64,
    /// Output scale in MW.
    pub sigma: f64,
}

impl Default for KernelParams {
    /// Daily-cycle defaults: 24 h length scales and period, 3/7 periodic
    /// scale, 1000 MW output scale.
    fn default() -> Self {
        KernelParams {
            l_exp: 24.0,
            l_per: 3.0 / 7.0,
            rho_period: 24.0,
            sigma: 1000.0,
        }
    }
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("l_exp", self.l_exp),
            ("l_per", self.l_per),
            ("rho_period", self.rho_period),
            ("sigma", self.sigma),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    "kernel params",
                    format!("{name} must be finite and > 0, got {v}"),
                ));
            }
        }
        Ok(())
    }
}

/// Locally periodic kernel: a sine-squared periodic factor times a
/// squared-exponential envelope, scaled by `sigma^2`.
pub fn locally_periodic_kernel(x: f64, x2: f64, kp: &KernelParams) -> f64 {
    let lag = (x - x2).abs();
    let periodic = (-2.0 * (std::f64::consts::PI * lag / kp.rho_period).sin().powi(2)
        / (kp.l_per * kp.l_per))
        .exp();
    let sq_exp = (-(lag * lag) / (2.0 * kp.l_exp * kp.l_exp)).exp();
    kp.sigma * kp.sigma * periodic * sq_exp
}

/// Hour-of-day seasonal mean: the average of history values sharing the
/// query's hour of day, falling back to the global mean when no sample
/// matches.
pub fn seasonal_mean(history: &HourlySeries, query_hour: i64) -> f64 {
    let target = query_hour.rem_euclid(24);
    let mut sum = 0.0;
    let mut count = 0usize;
    for (&h, &v) in history.hours.iter().zip(&history.values) {
        if h.rem_euclid(24) == target {
            sum += v;
            count += 1;
        }
    }
    if count > 0 {
        sum / count as f64
    } else {
        history.values.iter().sum::<f64>() / history.len() as f64
    }
}

/// Gaussian posterior over usage at the target hours.
#[derive(Debug, Clone, PartialEq)]
pub struct GpPosterior {
    pub target_hours: Vec<i64>,
    /// Posterior mean in MW, one entry per target hour.
    pub mean: DVector<f64>,
    /// Posterior covariance in MW^2.
    pub covariance: DMatrix<f64>,
    /// Prior variance `sigma^2`, kept for jitter scaling.
    pub prior_variance: f64,
}

impl GpPosterior {
    pub fn horizon(&self) -> usize {
        self.target_hours.len()
    }

    pub fn mean_slice(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.covariance[(i, i)]
    }
}

fn cholesky_with_jitter(
    matrix: &DMatrix<f64>,
    base_jitter: f64,
) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let mut jitter = base_jitter;
    for attempt in 0..=MAX_JITTER_ESCALATIONS {
        let mut jittered = matrix.clone();
        for i in 0..jittered.nrows() {
            jittered[(i, i)] += jitter;
        }
        if let Some(chol) = jittered.cholesky() {
            return Ok(chol);
        }
        if attempt < MAX_JITTER_ESCALATIONS {
            jitter *= 10.0;
        }
    }
    Err(Error::Factorization {
        attempts: MAX_JITTER_ESCALATIONS,
        final_jitter: jitter,
    })
}

/// Condition the kernel on history and return the posterior over the
/// target hours. The training Gram matrix gets a relative jitter on its
/// diagonal before the symmetric positive-definite solve; jitter escalates
/// tenfold up to three times before factorization failure is reported.
pub fn gp_posterior(
    history: &HourlySeries,
    target_hours: &[i64],
    kp: &KernelParams,
) -> Result<GpPosterior> {
    gp_posterior_with_noise(history, target_hours, kp, 0.0)
}

/// [`gp_posterior`] with an explicit diagonal observation-noise variance
/// (MW^2) on the training points. The default fit is noiseless apart from
/// the stabilizing jitter.
pub fn gp_posterior_with_noise(
    history: &HourlySeries,
    target_hours: &[i64],
    kp: &KernelParams,
    noise_variance: f64,
) -> Result<GpPosterior> {
    kp.validate()?;
    if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
        return Err(Error::invalid(
            "gp fit",
            format!("noise variance must be finite and >= 0, got {noise_variance}"),
        ));
    }
    if history.len() < 2 {
        return Err(Error::invalid(
            "gp fit",
            format!("needs at least 2 history points, got {}", history.len()),
        ));
    }
    if target_hours.is_empty() {
        return Err(Error::invalid("gp fit", "needs at least one target hour"));
    }

    let n = history.len();
    let m = target_hours.len();
    let sigma_sq = kp.sigma * kp.sigma;

    let mut train = DMatrix::from_fn(n, n, |i, j| {
        locally_periodic_kernel(history.hours[i] as f64, history.hours[j] as f64, kp)
    });
    for i in 0..n {
        train[(i, i)] += noise_variance;
    }
    let chol = cholesky_with_jitter(&train, BASE_JITTER_FRACTION * sigma_sq)?;

    let residual = DVector::from_fn(n, |i, _| {
        history.values[i] - seasonal_mean(history, history.hours[i])
    });
    let alpha = chol.solve(&residual);

    let cross = DMatrix::from_fn(m, n, |i, j| {
        locally_periodic_kernel(target_hours[i] as f64, history.hours[j] as f64, kp)
    });
    let mean = DVector::from_fn(m, |i, _| {
        seasonal_mean(history, target_hours[i]) + cross.row(i).transpose().dot(&alpha)
    });

    let prior = DMatrix::from_fn(m, m, |i, j| {
        locally_periodic_kernel(target_hours[i] as f64, target_hours[j] as f64, kp)
    });
    let solved = chol.solve(&cross.transpose());
    let mut covariance = prior - &cross * solved;
    // Symmetrize away the solve's rounding asymmetry.
    for i in 0..m {
        for j in (i + 1)..m {
            let avg = (covariance[(i, j)] + covariance[(j, i)]) / 2.0;
            covariance[(i, j)] = avg;
            covariance[(j, i)] = avg;
        }
    }

    Ok(GpPosterior {
        target_hours: target_hours.to_vec(),
        mean,
        covariance,
        prior_variance: sigma_sq,
    })
}

/// Draw `n` usage trajectories `mu + L z` from the posterior, with `L` a
/// Cholesky factor of the covariance and `z` standard normal. Draws are
/// deterministic under a fixed seed.
///
/// An all-zero covariance is degenerate, not an error: every sample equals
/// the mean. Otherwise the factor is taken from the covariance itself when
/// it is positive definite, or from a jittered copy when it is merely
/// semidefinite.
pub fn sample_posterior(post: &GpPosterior, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let m = post.horizon();
    let factor = if post.covariance.amax() == 0.0 {
        DMatrix::zeros(m, m)
    } else if let Some(chol) = post.covariance.clone().cholesky() {
        chol.unpack()
    } else {
        cholesky_with_jitter(&post.covariance, BASE_JITTER_FRACTION * post.prior_variance)?
            .unpack()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let z = DVector::from_fn(m, |_, _| StandardNormal.sample(&mut rng));
        let draw = &post.mean + &factor * z;
        samples.push(draw.iter().copied().collect());
    }
    Ok(samples)
}

/// Least-squares polynomial smoothing: fit a degree-`degree` polynomial to
/// `(hours, raw)` and evaluate it back at the same hours. Hours are mapped
/// affinely onto [-1, 1] before fitting for conditioning.
pub fn smooth_sample(hours: &[i64], raw: &[f64], degree: usize) -> Result<Vec<f64>> {
    let n = raw.len();
    if hours.len() != n || n == 0 {
        return Err(Error::invalid(
            "polynomial fit",
            format!("hours and values must be equal-length and non-empty, got {} and {n}", hours.len()),
        ));
    }
    if degree >= n {
        return Err(Error::invalid(
            "polynomial fit",
            format!("degree {degree} needs more than {n} points"),
        ));
    }

    let lo = *hours.iter().min().expect("non-empty") as f64;
    let hi = *hours.iter().max().expect("non-empty") as f64;
    let scaled: Vec<f64> = hours
        .iter()
        .map(|&h| {
            if hi > lo {
                2.0 * (h as f64 - lo) / (hi - lo) - 1.0
            } else {
                0.0
            }
        })
        .collect();

    let vandermonde = DMatrix::from_fn(n, degree + 1, |i, j| scaled[i].powi(j as i32));
    let rhs = DVector::from_column_slice(raw);
    let svd = vandermonde.svd(true, true);
    let s_max = svd.singular_values.max();
    let tol = s_max * 1e-12 * n as f64;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if rank < degree + 1 {
        return Err(Error::RankDeficient { degree, points: n });
    }
    let coeffs = svd
        .solve(&rhs, tol)
        .map_err(|_| Error::RankDeficient { degree, points: n })?;

    Ok(scaled
        .iter()
        .map(|&t| {
            // Horner evaluation, highest power first.
            let mut acc = 0.0;
            for j in (0..=degree).rev() {
                acc = acc * t + coeffs[j];
            }
            acc
        })
        .collect())
}

/// Scale usage in MW into prices in dollars per kWh.
pub fn usage_to_price(usage: &[f64]) -> PriceScenario {
    let prices = usage.iter().map(|e| e / SUPPLY_DEMAND_SCALE).collect();
    PriceScenario {
        prices,
        label: "forecast".to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConsumerKind {
    /// Optimize against the smoothed posterior mean.
    Mean,
    /// Optimize against the most expensive of `n_samples` smoothed draws.
    RiskAverse,
}

/// How a consumer turns the posterior into the single scenario they plan
/// against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsumerPolicy {
    pub kind: ConsumerKind,
    pub n_samples: usize,
    pub poly_degree: usize,
    pub seed: u64,
}

impl ConsumerPolicy {
    pub fn validate(&self, horizon: usize) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::invalid("consumer policy", "n_samples must be >= 1"));
        }
        if self.poly_degree >= horizon {
            return Err(Error::invalid(
                "consumer policy",
                format!(
                    "poly_degree {} must be below the horizon {horizon}",
                    self.poly_degree
                ),
            ));
        }
        Ok(())
    }
}

/// Index of the candidate with the largest total, ties to the first.
pub(crate) fn most_expensive(candidates: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_total = f64::NEG_INFINITY;
    for (i, c) in candidates.iter().enumerate() {
        let total: f64 = c.iter().sum();
        if total > best_total {
            best_total = total;
            best = i;
        }
    }
    best
}

/// Turn the posterior into a price scenario for the given consumer type:
/// the smoothed mean for the average consumer, or the most expensive of
/// `n_samples` smoothed draws for the risk-averse one.
pub fn select_scenario(post: &GpPosterior, policy: &ConsumerPolicy) -> Result<PriceScenario> {
    policy.validate(post.horizon())?;
    match policy.kind {
        ConsumerKind::Mean => {
            let smoothed = smooth_sample(&post.target_hours, post.mean_slice(), policy.poly_degree)?;
            let mut scenario = usage_to_price(&smoothed);
            scenario.label = "gp-mean".to_string();
            Ok(scenario)
        }
        ConsumerKind::RiskAverse => {
            let raw_samples = sample_posterior(post, policy.n_samples, policy.seed)?;
            let mut smoothed = Vec::with_capacity(raw_samples.len());
            for raw in &raw_samples {
                smoothed.push(smooth_sample(&post.target_hours, raw, policy.poly_degree)?);
            }
            let pick = most_expensive(&smoothed);
            let mut scenario = usage_to_price(&smoothed[pick]);
            scenario.label = format!("gp-worst-of-{}", policy.n_samples);
            Ok(scenario)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn paper_kernel() -> KernelParams {
        KernelParams::default()
    }

    /// Three identical days of a 24 h sinusoid around 50 GW.
    fn periodic_history() -> HourlySeries {
        let hours: Vec<i64> = (0..72).collect();
        let values = hours
            .iter()
            .map(|&h| 50_000.0 + 10_000.0 * (2.0 * std::f64::consts::PI * h as f64 / 24.0).sin())
            .collect();
        HourlySeries::new(hours, values).unwrap()
    }

    #[test]
    fn kernel_at_zero_lag_is_sigma_squared() {
        let k = locally_periodic_kernel(17.0, 17.0, &paper_kernel());
        assert_relative_eq!(k, 1e6, max_relative = 1e-12);
    }

    #[test]
    fn kernel_at_one_period_lag() {
        let k = locally_periodic_kernel(0.0, 24.0, &paper_kernel());
        assert_relative_eq!(k, 1e6 * (-0.5f64).exp(), max_relative = 1e-9);
    }

    #[test]
    fn kernel_is_symmetric_and_bounded() {
        let kp = paper_kernel();
        for (a, b) in [(0.0, 13.0), (5.5, 100.0), (-3.0, 7.0)] {
            assert_eq!(
                locally_periodic_kernel(a, b, &kp),
                locally_periodic_kernel(b, a, &kp)
            );
            let k = locally_periodic_kernel(a, b, &kp);
            assert!(k > 0.0 && k <= kp.sigma * kp.sigma);
        }
    }

    #[test]
    fn seasonal_mean_matches_hour_of_day() {
        let history =
            HourlySeries::new(vec![0, 24, 48], vec![10.0, 20.0, 30.0]).unwrap();
        assert_relative_eq!(seasonal_mean(&history, 72), 20.0, max_relative = 1e-15);
    }

    #[test]
    fn seasonal_mean_constant_history() {
        let history = HourlySeries::new((0..24).collect(), vec![50_000.0; 24]).unwrap();
        for h in 0..48 {
            assert_eq!(seasonal_mean(&history, h), 50_000.0);
        }
    }

    #[test]
    fn seasonal_mean_falls_back_to_global_mean() {
        // Sub-day history: hour-of-day 7 never appears.
        let history = HourlySeries::new(vec![0, 1, 2], vec![1.0, 2.0, 6.0]).unwrap();
        assert_relative_eq!(seasonal_mean(&history, 7), 3.0, max_relative = 1e-15);
    }

    #[test]
    fn posterior_interpolates_training_points() {
        let history = periodic_history();
        let targets: Vec<i64> = vec![10, 23, 41];
        let post = gp_posterior(&history, &targets, &paper_kernel()).unwrap();
        for (i, &t) in targets.iter().enumerate() {
            let observed = history.values[t as usize];
            assert!(
                (post.mean[i] - observed).abs() <= 1e-3 * 1000.0,
                "hour {t}: mean {} vs observed {observed}",
                post.mean[i]
            );
            assert!(post.variance(i) <= 2.0 * BASE_JITTER_FRACTION * 1e6 * 10.0);
        }
    }

    #[test]
    fn posterior_mean_equals_seasonal_mean_for_zero_residual() {
        // History that IS its seasonal mean: three identical days.
        let history = periodic_history();
        let targets: Vec<i64> = (72..96).collect();
        let post = gp_posterior(&history, &targets, &paper_kernel()).unwrap();
        for (i, &t) in targets.iter().enumerate() {
            let m = seasonal_mean(&history, t);
            assert!(
                (post.mean[i] - m).abs() <= 1e-9 * (1.0 + m.abs()),
                "hour {t}: {} vs {m}",
                post.mean[i]
            );
        }
    }

    #[test]
    fn far_extrapolation_recovers_prior_variance() {
        let history = periodic_history();
        // Hundreds of hours past the history, lag >> l_exp.
        let post = gp_posterior(&history, &[500], &paper_kernel()).unwrap();
        assert!(post.variance(0) >= 0.99 * 1e6);
        assert!(post.variance(0) <= 1e6 * (1.0 + 1e-6));
    }

    #[test]
    fn degenerate_covariance_samples_equal_mean() {
        let post = GpPosterior {
            target_hours: vec![0, 1],
            mean: DVector::from_vec(vec![5.0, 7.0]),
            covariance: DMatrix::zeros(2, 2),
            prior_variance: 1e6,
        };
        for draw in sample_posterior(&post, 4, 123).unwrap() {
            assert_eq!(draw, vec![5.0, 7.0]);
        }
    }

    #[test]
    fn sampling_is_deterministic_under_seed() {
        let history = periodic_history();
        let post = gp_posterior(&history, &(72..96).collect::<Vec<_>>(), &paper_kernel()).unwrap();
        let a = sample_posterior(&post, 3, 42).unwrap();
        let b = sample_posterior(&post, 3, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_posterior(&post, 3, 43).unwrap();
        assert_ne!(a, c);
    }

    /// Empirical covariance of many draws reproduces the posterior
    /// covariance entry by entry.
    #[test]
    fn sampling_consistency_at_three_points() {
        // Far-extrapolated targets keep every covariance entry large, so
        // 5 % relative comparisons are meaningful.
        let history = HourlySeries::new(vec![0, 1], vec![40_000.0, 41_000.0]).unwrap();
        let targets = [200, 201, 202];
        let post = gp_posterior(&history, &targets, &paper_kernel()).unwrap();
        let n = 50_000;
        let draws = sample_posterior(&post, n, 2024).unwrap();
        let mean: Vec<f64> = (0..3)
            .map(|i| draws.iter().map(|d| d[i]).sum::<f64>() / n as f64)
            .collect();
        for i in 0..3 {
            for j in 0..3 {
                let empirical = draws
                    .iter()
                    .map(|d| (d[i] - mean[i]) * (d[j] - mean[j]))
                    .sum::<f64>()
                    / (n - 1) as f64;
                let expected = post.covariance[(i, j)];
                assert!(
                    (empirical - expected).abs() <= 0.05 * expected.abs(),
                    "cov[{i}][{j}]: empirical {empirical:.4e} vs posterior {expected:.4e}"
                );
            }
        }
    }

    #[test]
    fn observation_noise_inflates_training_variance() {
        let history = periodic_history();
        let targets: Vec<i64> = vec![10, 40];
        let noiseless = gp_posterior(&history, &targets, &paper_kernel()).unwrap();
        let noisy =
            gp_posterior_with_noise(&history, &targets, &paper_kernel(), 500.0 * 500.0).unwrap();
        for i in 0..targets.len() {
            assert!(noisy.variance(i) > noiseless.variance(i));
        }
        assert!(gp_posterior_with_noise(&history, &targets, &paper_kernel(), -1.0).is_err());
    }

    #[test]
    fn sample_mean_concentrates_on_posterior_mean() {
        let history = periodic_history();
        let post = gp_posterior(&history, &[80], &paper_kernel()).unwrap();
        let draws = sample_posterior(&post, 10_000, 7).unwrap();
        let mean: f64 = draws.iter().map(|d| d[0]).sum::<f64>() / draws.len() as f64;
        let sd = post.variance(0).max(0.0).sqrt();
        assert!(
            (mean - post.mean[0]).abs() <= 4.0 * sd / (draws.len() as f64).sqrt(),
            "sample mean {mean} vs posterior mean {}",
            post.mean[0]
        );
    }

    #[test]
    fn smoothing_reproduces_polynomials() {
        let hours: Vec<i64> = (0..10).collect();
        let raw: Vec<f64> = hours
            .iter()
            .map(|&h| 3.0 + 2.0 * h as f64 - 0.5 * (h as f64).powi(2))
            .collect();
        let smoothed = smooth_sample(&hours, &raw, 2).unwrap();
        for (s, r) in smoothed.iter().zip(&raw) {
            assert_relative_eq!(s, r, max_relative = 1e-8);
        }
    }

    #[test]
    fn full_degree_interpolates() {
        let hours: Vec<i64> = (0..6).collect();
        let raw = vec![1.0, 4.0, 2.0, 8.0, -1.0, 3.0];
        let smoothed = smooth_sample(&hours, &raw, 5).unwrap();
        for (s, r) in smoothed.iter().zip(&raw) {
            assert!((s - r).abs() < 1e-6, "{s} vs {r}");
        }
    }

    #[test]
    fn constant_input_smooths_to_constant() {
        let hours: Vec<i64> = (0..8).collect();
        let smoothed = smooth_sample(&hours, &[42.0; 8], 3).unwrap();
        for s in smoothed {
            assert_relative_eq!(s, 42.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn smoothing_rejects_bad_degrees() {
        let hours: Vec<i64> = (0..4).collect();
        assert!(smooth_sample(&hours, &[1.0; 4], 4).is_err());
        // Duplicate abscissae make anything above degree 0 rank deficient.
        let dup = vec![3, 3, 3, 3];
        assert!(matches!(
            smooth_sample(&dup, &[1.0, 2.0, 3.0, 4.0], 2),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn usage_to_price_examples() {
        let scenario = usage_to_price(&[80_000.0, 0.0, 40_000.0]);
        assert_eq!(scenario.prices, vec![1.0, 0.0, 0.5]);
    }

    #[test]
    fn most_expensive_picks_largest_total() {
        let candidates = vec![vec![5.0, 5.0], vec![20.0, 10.0], vec![10.0, 10.0]];
        assert_eq!(most_expensive(&candidates), 1);
    }

    #[test]
    fn mean_policy_is_smoothed_mean_price() {
        let history = periodic_history();
        let targets: Vec<i64> = (72..96).collect();
        let post = gp_posterior(&history, &targets, &paper_kernel()).unwrap();
        let policy = ConsumerPolicy {
            kind: ConsumerKind::Mean,
            n_samples: 1,
            poly_degree: 8,
            seed: 0,
        };
        let scenario = select_scenario(&post, &policy).unwrap();
        let expected = usage_to_price(&smooth_sample(&targets, post.mean_slice(), 8).unwrap());
        assert_eq!(scenario.prices, expected.prices);
    }

    #[test]
    fn single_sample_risk_averse_returns_it() {
        let history = periodic_history();
        let targets: Vec<i64> = (72..96).collect();
        let post = gp_posterior(&history, &targets, &paper_kernel()).unwrap();
        let policy = ConsumerPolicy {
            kind: ConsumerKind::RiskAverse,
            n_samples: 1,
            poly_degree: 8,
            seed: 5,
        };
        let scenario = select_scenario(&post, &policy).unwrap();
        let raw = sample_posterior(&post, 1, 5).unwrap();
        let expected = usage_to_price(&smooth_sample(&targets, &raw[0], 8).unwrap());
        assert_eq!(scenario.prices, expected.prices);
    }

    #[test]
    fn risk_averse_picks_most_expensive_sample() {
        let history = periodic_history();
        let targets: Vec<i64> = (72..96).collect();
        let post = gp_posterior(&history, &targets, &paper_kernel()).unwrap();
        let policy = ConsumerPolicy {
            kind: ConsumerKind::RiskAverse,
            n_samples: 6,
            poly_degree: 8,
            seed: 11,
        };
        let scenario = select_scenario(&post, &policy).unwrap();
        // Rebuild the candidate set and check the argmax-total rule.
        let raws = sample_posterior(&post, 6, 11).unwrap();
        let smoothed: Vec<Vec<f64>> = raws
            .iter()
            .map(|r| smooth_sample(&targets, r, 8).unwrap())
            .collect();
        let pick = most_expensive(&smoothed);
        let expected = usage_to_price(&smoothed[pick]);
        assert_eq!(scenario.prices, expected.prices);
        let total: f64 = scenario.prices.iter().sum();
        for s in &smoothed {
            let other: f64 = s.iter().map(|v| v / SUPPLY_DEMAND_SCALE).sum();
            assert!(total >= other - 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn kernel_periodic_factor_repeats(x in -50.0f64..50.0, lag in 0.0f64..30.0) {
            let kp = paper_kernel();
            let ratio = |d: f64| {
                let sq = (-(d * d) / (2.0 * kp.l_exp * kp.l_exp)).exp();
                locally_periodic_kernel(x, x + d, &kp) / (kp.sigma * kp.sigma * sq)
            };
            let a = ratio(lag);
            let b = ratio(lag + kp.rho_period);
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }

        #[test]
        fn gram_matrix_is_psd(hours in proptest::collection::btree_set(0i64..720, 2..96)) {
            let kp = paper_kernel();
            let hours: Vec<i64> = hours.into_iter().collect();
            let n = hours.len();
            let jitter = BASE_JITTER_FRACTION * kp.sigma * kp.sigma;
            let gram = DMatrix::from_fn(n, n, |i, j| {
                let mut v = locally_periodic_kernel(hours[i] as f64, hours[j] as f64, &kp);
                if i == j {
                    v += jitter;
                }
                v
            });
            let eigen = gram.symmetric_eigen();
            let min = eigen.eigenvalues.min();
            prop_assert!(min >= -1e-6 * kp.sigma * kp.sigma);
        }

        #[test]
        fn posterior_variance_never_exceeds_prior(
            targets in proptest::collection::btree_set(60i64..200, 1..12),
        ) {
            let history = periodic_history();
            let targets: Vec<i64> = targets.into_iter().collect();
            let post = gp_posterior(&history, &targets, &paper_kernel()).unwrap();
            for i in 0..post.horizon() {
                prop_assert!(post.variance(i) <= 1e6 + 1e-6 * 1e6);
                prop_assert!(post.variance(i) >= -1e-8 * 1e6);
            }
        }

        #[test]
        fn usage_to_price_is_linear_and_monotone(
            usage in proptest::collection::vec(0.0f64..100_000.0, 1..24),
            scale in 0.1f64..10.0,
        ) {
            let base = usage_to_price(&usage);
            let scaled_usage: Vec<f64> = usage.iter().map(|u| u * scale).collect();
            let scaled = usage_to_price(&scaled_usage);
            for (b, s) in base.prices.iter().zip(&scaled.prices) {
                prop_assert!((s - b * scale).abs() <= 1e-12 * (1.0 + s.abs()));
            }
            let mut sorted = usage.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let sorted_prices = usage_to_price(&sorted);
            for w in sorted_prices.prices.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
        }
    }
}
