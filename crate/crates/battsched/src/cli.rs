//! Command-line experiment runners: argument parsing, configuration
//! validation, and artifact emission.
//!
//! Three experiment kinds share one pipeline: build a price scenario
//! (constant value, varied from file or seeded draws, or GP-predicted
//! from usage history), optimize or sweep, then write plot-ready CSV
//! artifacts plus a JSON summary that echoes enough configuration to
//! reproduce the run.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::battery::{simulate_soc, BatteryParams, DegradationCurve, Schedule};
use crate::cost::PriceScenario;
use crate::cost::EfficiencyParams;
use crate::error::{Error, Result};
use crate::forecast::{
    gp_posterior, sample_posterior, select_scenario, ConsumerKind, ConsumerPolicy, KernelParams,
};
use crate::io;
use crate::objective::ObjectiveConfig;
use crate::optimizer::{derive_seed, optimize_schedule, OptimizerConfig};
use crate::pareto::{self, weight_grid};

/// Seed-stream tags so independent random decisions never share a stream.
const RANDOM_PRICE_STREAM: u64 = 0x7072_6963;
const FORECAST_STREAM: u64 = 0x6763_6173;

#[derive(Parser, Debug)]
#[command(
    name = "battsched",
    version,
    about = "Battery charge-schedule optimization balancing energy cost against degradation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Optimize one schedule for a single cost weight.
    Optimize(OptimizeArgs),
    /// Sweep the cost weight across a grid and emit the Pareto frontier.
    Sweep(SweepArgs),
    /// Fit the usage forecaster and emit its posterior and samples.
    Forecast(ForecastArgs),
    /// Check input files against their format invariants.
    Validate(ValidateArgs),
}

/// Runs one fully-parsed command, writing its artifacts; returns whether
/// the run succeeded (validate can complete yet report bad files).
pub fn run_experiment(command: &Command) -> Result<bool> {
    match command {
        Command::Optimize(args) => run_optimize(args).map(|()| true),
        Command::Sweep(args) => run_sweep(args).map(|()| true),
        Command::Forecast(args) => run_forecast(args).map(|()| true),
        Command::Validate(args) => run_validate(args),
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// One constant price across the horizon.
    Constant,
    /// Per-hour prices from a file or seeded uniform draws.
    Varied,
    /// Prices forecast from hourly usage history.
    Predicted,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyArg {
    Mean,
    RiskAverse,
}

impl From<PolicyArg> for ConsumerKind {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Mean => ConsumerKind::Mean,
            PolicyArg::RiskAverse => ConsumerKind::RiskAverse,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct ProblemArgs {
    /// Which price source drives the objective.
    #[arg(long, value_enum)]
    pub experiment: ExperimentKind,

    /// Constant price in $/kWh (constant experiment; default 0.10).
    #[arg(long)]
    pub const_price: Option<f64>,

    /// Price scenario CSV with header `hour,price_usd_per_kwh`.
    #[arg(long)]
    pub price: Option<PathBuf>,

    /// Seeded uniform random prices over [LO, HI] $/kWh.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub random_prices: Option<Vec<f64>>,

    /// Hourly usage history CSV with header `datetime,mw`.
    #[arg(long)]
    pub history: Option<PathBuf>,

    /// Accept hour gaps in the history file (gaps are skipped, not imputed).
    #[arg(long)]
    pub allow_gaps: bool,

    /// History window in hours for the forecaster.
    #[arg(long, default_value_t = 72)]
    pub window: usize,

    /// Consumer policy for predicted prices.
    #[arg(long, value_enum, default_value_t = PolicyArg::RiskAverse)]
    pub policy: PolicyArg,

    /// Posterior draws for the risk-averse policy.
    #[arg(long, default_value_t = 10)]
    pub n_samples: usize,

    /// Degree of the sample-smoothing polynomial.
    #[arg(long, default_value_t = 8)]
    pub poly_degree: usize,

    /// Initial state of charge in percent.
    #[arg(long, default_value_t = 50.0)]
    pub soc0: f64,

    /// Horizon in hours, 12 to 48 (default 12; 24 for predicted prices).
    #[arg(long)]
    pub horizon: Option<usize>,

    /// Degradation curve CSV; the built-in synthetic curve when omitted.
    #[arg(long, env = "BATTSCHED_CURVE")]
    pub curve: Option<PathBuf>,

    /// Market inefficiency factor in (0, 1].
    #[arg(long, default_value_t = 0.95)]
    pub eta: f64,
}

#[derive(Args, Debug, Clone)]
pub struct OptimizerArgs {
    /// Penalty scaling factor.
    #[arg(long, default_value_t = 1000.0)]
    pub rho: f64,

    /// Descent step size (a dimensionless rate; see --no-auto-scale).
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,

    /// Momentum factor in [0, 1).
    #[arg(long, default_value_t = 0.9)]
    pub beta: f64,

    /// Central-difference step in watts.
    #[arg(long, default_value_t = 1e-3)]
    pub fd_step: f64,

    /// Descent iterations per restart.
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,

    /// Random restarts.
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,

    /// Master random seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads; 1 runs fully sequentially. Either way the results
    /// are deterministic for a fixed seed.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,

    /// Treat --alpha as a raw step length instead of calibrating it to the
    /// probed gradient scale.
    #[arg(long)]
    pub no_auto_scale: bool,
}

impl OptimizerArgs {
    fn to_config(&self, parallel: bool) -> OptimizerConfig {
        OptimizerConfig {
            step_size: self.alpha,
            momentum: self.beta,
            fd_step: self.fd_step,
            max_iters: self.iters,
            n_restarts: self.restarts,
            init_power_range: (-5.0, 5.0),
            seed: self.seed,
            auto_scale: !self.no_auto_scale,
            parallel,
        }
    }
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,

    /// Cost weight in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub wc: f64,

    #[command(flatten)]
    pub optimizer: OptimizerArgs,

    /// Output directory for schedule.csv and summary.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,

    /// Number of evenly spaced weights across [0, 1].
    #[arg(long, default_value_t = 21)]
    pub wc_grid: usize,

    #[command(flatten)]
    pub optimizer: OptimizerArgs,

    /// Output directory for frontier.csv and summary.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ForecastArgs {
    /// Hourly usage history CSV with header `datetime,mw`.
    #[arg(long)]
    pub history: PathBuf,

    #[arg(long)]
    pub allow_gaps: bool,

    /// History window in hours for the fit.
    #[arg(long, default_value_t = 72)]
    pub window: usize,

    /// Forecast horizon in hours.
    #[arg(long, default_value_t = 24)]
    pub horizon: usize,

    /// Posterior draws to emit.
    #[arg(long, default_value_t = 10)]
    pub n_samples: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output directory for forecast.csv and samples.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long)]
    pub price: Option<PathBuf>,

    #[arg(long)]
    pub history: Option<PathBuf>,

    #[arg(long)]
    pub allow_gaps: bool,

    #[arg(long, env = "BATTSCHED_CURVE")]
    pub curve: Option<PathBuf>,
}

/// Everything the summary JSON echoes back; enough to reproduce the run
/// bit for bit in sequential mode.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub experiment: ExperimentKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub soc_0: f64,
    pub horizon: usize,
    pub price_source: String,
    pub scenario_label: String,
    pub curve: String,
    pub eta: f64,
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    pub fd_step: f64,
    pub iters: usize,
    pub restarts: usize,
    pub seed: u64,
    pub threads: usize,
    pub auto_scale: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poly_degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub f: f64,
    pub cost_usd: f64,
    pub degradation: f64,
    pub penalty: f64,
    pub feasible: bool,
    pub iterations: usize,
    pub restart_index: usize,
    pub rho_final: f64,
    pub seed: u64,
    pub warnings: Vec<String>,
    pub config: ConfigEcho,
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub points: usize,
    pub non_dominated: usize,
    pub failed: usize,
    pub seed: u64,
    pub warnings: Vec<String>,
    pub config: ConfigEcho,
}

#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
}

impl ErrorReport {
    pub fn from_error(e: &Error) -> Self {
        let kind = match e {
            Error::Invalid { .. } => "invalid-input",
            Error::Csv { .. } => "csv",
            Error::Io { .. } => "io",
            Error::HorizonMismatch { .. } => "horizon-mismatch",
            Error::NonFiniteProbe { .. } => "non-finite-objective",
            Error::AllRestartsDiverged { .. } => "all-restarts-diverged",
            Error::Factorization { .. } => "factorization",
            Error::RankDeficient { .. } => "rank-deficient",
            Error::Config { .. } => "config",
        };
        let violations = match e {
            Error::Config { violations } => violations.clone(),
            _ => Vec::new(),
        };
        ErrorReport {
            kind,
            message: e.to_string(),
            violations,
        }
    }
}

fn default_horizon(kind: ExperimentKind) -> usize {
    match kind {
        ExperimentKind::Constant | ExperimentKind::Varied => 12,
        ExperimentKind::Predicted => 24,
    }
}

/// Validate the cross-cutting run parameters, collecting every violation.
fn validate_problem(
    p: &ProblemArgs,
    opt: &OptimizerArgs,
    horizon: usize,
    w_c: Option<f64>,
    wc_grid: Option<usize>,
) -> Result<()> {
    let mut violations = Vec::new();

    match p.experiment {
        ExperimentKind::Constant => {
            if p.price.is_some() || p.random_prices.is_some() {
                violations.push(
                    "constant experiment takes --const-price only, not --price or --random-prices"
                        .to_string(),
                );
            }
            if p.history.is_some() {
                violations.push("constant experiment does not take --history".to_string());
            }
        }
        ExperimentKind::Varied => {
            let sources = usize::from(p.price.is_some()) + usize::from(p.random_prices.is_some());
            if sources != 1 {
                violations.push(
                    "varied experiment needs exactly one of --price or --random-prices".to_string(),
                );
            }
            if p.const_price.is_some() {
                violations.push("varied experiment does not take --const-price".to_string());
            }
            if p.history.is_some() {
                violations.push("varied experiment does not take --history".to_string());
            }
        }
        ExperimentKind::Predicted => {
            if p.history.is_none() {
                violations.push("predicted experiment needs --history".to_string());
            }
            if p.const_price.is_some() || p.price.is_some() || p.random_prices.is_some() {
                violations.push(
                    "predicted experiment takes only --history as its price source".to_string(),
                );
            }
            if p.window < 2 {
                violations.push(format!("--window must be >= 2, got {}", p.window));
            }
            if p.n_samples == 0 {
                violations.push("--n-samples must be >= 1".to_string());
            }
            if p.poly_degree >= horizon {
                violations.push(format!(
                    "--poly-degree {} must be below the horizon {horizon}",
                    p.poly_degree
                ));
            }
        }
    }

    if let Some(range) = &p.random_prices {
        let well_formed =
            range.len() == 2 && range[0].is_finite() && range[1].is_finite() && range[0] < range[1];
        if !well_formed {
            violations.push(format!(
                "--random-prices needs finite LO < HI, got {range:?}"
            ));
        }
    }
    if !(12..=48).contains(&horizon) {
        violations.push(format!("--horizon must be within 12..=48, got {horizon}"));
    }
    if !(0.0..=100.0).contains(&p.soc0) {
        violations.push(format!("--soc0 must be within [0, 100], got {}", p.soc0));
    }
    if !(p.eta > 0.0 && p.eta <= 1.0) {
        violations.push(format!("--eta must be in (0, 1], got {}", p.eta));
    }
    if let Some(w) = w_c {
        if !(0.0..=1.0).contains(&w) {
            violations.push(format!("--wc must be in [0, 1], got {w}"));
        }
    }
    if let Some(n) = wc_grid {
        if n == 0 {
            violations.push("--wc-grid must be >= 1".to_string());
        }
    }
    if !(opt.rho >= 0.0 && opt.rho.is_finite()) {
        violations.push(format!("--rho must be finite and >= 0, got {}", opt.rho));
    }
    if !(opt.alpha > 0.0 && opt.alpha.is_finite()) {
        violations.push(format!("--alpha must be > 0, got {}", opt.alpha));
    }
    if !(0.0..1.0).contains(&opt.beta) {
        violations.push(format!("--beta must be in [0, 1), got {}", opt.beta));
    }
    if !(opt.fd_step > 0.0 && opt.fd_step.is_finite()) {
        violations.push(format!("--fd-step must be > 0, got {}", opt.fd_step));
    }
    if opt.iters == 0 {
        violations.push("--iters must be >= 1".to_string());
    }
    if opt.restarts == 0 {
        violations.push("--restarts must be >= 1".to_string());
    }
    if opt.threads == 0 {
        violations.push("--threads must be >= 1".to_string());
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::Config { violations })
    }
}

fn load_curve(path: &Option<PathBuf>) -> Result<(DegradationCurve, String)> {
    match path {
        Some(p) => Ok((io::read_curve_csv(p)?, p.display().to_string())),
        None => Ok((
            DegradationCurve::synthetic_default(),
            "builtin-synthetic".to_string(),
        )),
    }
}

struct ScenarioBundle {
    scenario: PriceScenario,
    source: String,
    warnings: Vec<String>,
}

fn build_scenario(p: &ProblemArgs, horizon: usize, seed: u64) -> Result<ScenarioBundle> {
    let mut warnings = Vec::new();
    let (scenario, source) = match p.experiment {
        ExperimentKind::Constant => {
            let price = p.const_price.unwrap_or(0.10);
            (
                PriceScenario::constant(price, horizon, "constant")?,
                format!("constant {price} $/kWh"),
            )
        }
        ExperimentKind::Varied => {
            if let Some(path) = &p.price {
                let scenario = io::read_price_csv(path)?;
                if scenario.horizon() != horizon {
                    return Err(Error::HorizonMismatch {
                        powers: horizon,
                        prices: scenario.horizon(),
                    });
                }
                (scenario, path.display().to_string())
            } else {
                let range = p.random_prices.as_ref().expect("validated");
                let (lo, hi) = (range[0], range[1]);
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(seed, RANDOM_PRICE_STREAM));
                let prices = (0..horizon).map(|_| rng.random_range(lo..=hi)).collect();
                (
                    PriceScenario::new(prices, "random-varied")?,
                    format!("seeded uniform prices in [{lo}, {hi}] $/kWh"),
                )
            }
        }
        ExperimentKind::Predicted => {
            let path = p.history.as_ref().expect("validated");
            let full = io::read_history_csv(path, p.allow_gaps)?;
            let window = full.tail(p.window);
            if window.len() < 2 {
                return Err(Error::invalid(
                    "forecast",
                    format!("history window has {} rows; need at least 2", window.len()),
                ));
            }
            let start = window.last_hour() + 1;
            let targets: Vec<i64> = (start..start + horizon as i64).collect();
            let posterior = gp_posterior(&window, &targets, &KernelParams::default())?;
            let policy = ConsumerPolicy {
                kind: p.policy.into(),
                n_samples: p.n_samples,
                poly_degree: p.poly_degree,
                seed: derive_seed(seed, FORECAST_STREAM),
            };
            let scenario = select_scenario(&posterior, &policy)?;
            (scenario, format!("forecast from {}", path.display()))
        }
    };
    if scenario.has_negative() {
        warnings.push(format!(
            "price scenario `{}` contains negative prices",
            scenario.label
        ));
    }
    Ok(ScenarioBundle {
        scenario,
        source,
        warnings,
    })
}

fn ensure_out_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn in_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if threads <= 1 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid("threads", e.to_string()))?;
    Ok(pool.install(job))
}

fn echo_base(
    p: &ProblemArgs,
    opt: &OptimizerArgs,
    horizon: usize,
    source: String,
    label: String,
    curve: String,
) -> ConfigEcho {
    let predicted = p.experiment == ExperimentKind::Predicted;
    ConfigEcho {
        experiment: p.experiment,
        w_c: None,
        weights: None,
        soc_0: p.soc0,
        horizon,
        price_source: source,
        scenario_label: label,
        curve,
        eta: p.eta,
        rho: opt.rho,
        alpha: opt.alpha,
        beta: opt.beta,
        fd_step: opt.fd_step,
        iters: opt.iters,
        restarts: opt.restarts,
        seed: opt.seed,
        threads: opt.threads,
        auto_scale: !opt.no_auto_scale,
        policy: predicted.then_some(p.policy),
        n_samples: predicted.then_some(p.n_samples),
        poly_degree: predicted.then_some(p.poly_degree),
        window: predicted.then_some(p.window),
    }
}

fn build_objective(
    p: &ProblemArgs,
    opt: &OptimizerArgs,
    w_c: f64,
    scenario: PriceScenario,
    curve: DegradationCurve,
) -> Result<ObjectiveConfig> {
    ObjectiveConfig::new(
        w_c,
        opt.rho,
        p.soc0,
        BatteryParams::default(),
        curve,
        EfficiencyParams::new(p.eta)?,
        scenario,
    )
}

pub fn run_optimize(args: &OptimizeArgs) -> Result<()> {
    let horizon = args
        .problem
        .horizon
        .unwrap_or_else(|| default_horizon(args.problem.experiment));
    validate_problem(&args.problem, &args.optimizer, horizon, Some(args.wc), None)?;
    let (curve, curve_desc) = load_curve(&args.problem.curve)?;
    let bundle = build_scenario(&args.problem, horizon, args.optimizer.seed)?;
    for w in &bundle.warnings {
        eprintln!("warning: {w}");
    }

    let cfg = build_objective(
        &args.problem,
        &args.optimizer,
        args.wc,
        bundle.scenario.clone(),
        curve,
    )?;
    let opt = args.optimizer.to_config(args.optimizer.threads > 1);
    let result = in_pool(args.optimizer.threads, || optimize_schedule(&cfg, &opt))??;

    ensure_out_dir(&args.out)?;
    let schedule = Schedule::new(args.problem.soc0, result.best_powers.clone())?;
    let trajectory = simulate_soc(&schedule, &cfg.battery);
    io::write_schedule_csv(
        &args.out.join("schedule.csv"),
        &schedule,
        &trajectory,
        &bundle.scenario,
    )?;

    let mut echo = echo_base(
        &args.problem,
        &args.optimizer,
        horizon,
        bundle.source,
        bundle.scenario.label.clone(),
        curve_desc,
    );
    echo.w_c = Some(args.wc);
    let raw = cfg.raw_objective(&result.best_powers)?;
    let summary = RunSummary {
        f: raw.weighted,
        cost_usd: result.raw_cost,
        degradation: result.raw_degradation,
        penalty: result.penalty,
        feasible: result.feasible,
        iterations: result.iterations,
        restart_index: result.restart_index,
        rho_final: result.rho_final,
        seed: args.optimizer.seed,
        warnings: bundle.warnings,
        config: echo,
    };
    io::write_json(&args.out.join("summary.json"), &summary)?;
    println!(
        "optimize: f = {:.6e}, cost = {:.6e} $, degradation = {:.6e}, feasible = {}",
        summary.f, summary.cost_usd, summary.degradation, summary.feasible
    );
    Ok(())
}

pub fn run_sweep(args: &SweepArgs) -> Result<()> {
    let horizon = args
        .problem
        .horizon
        .unwrap_or_else(|| default_horizon(args.problem.experiment));
    validate_problem(
        &args.problem,
        &args.optimizer,
        horizon,
        None,
        Some(args.wc_grid),
    )?;
    let (curve, curve_desc) = load_curve(&args.problem.curve)?;
    let bundle = build_scenario(&args.problem, horizon, args.optimizer.seed)?;
    for w in &bundle.warnings {
        eprintln!("warning: {w}");
    }

    let weights = weight_grid(args.wc_grid);
    let base = build_objective(
        &args.problem,
        &args.optimizer,
        0.0,
        bundle.scenario.clone(),
        curve,
    )?;
    let opt = args.optimizer.to_config(args.optimizer.threads > 1);
    let points = in_pool(args.optimizer.threads, || pareto::sweep(&weights, &base, &opt))??;

    ensure_out_dir(&args.out)?;
    io::write_frontier_csv(&args.out.join("frontier.csv"), &points)?;

    let frontier = pareto::non_dominated(&points);
    let failed = points.iter().filter(|p| p.error.is_some()).count();
    let mut echo = echo_base(
        &args.problem,
        &args.optimizer,
        horizon,
        bundle.source,
        bundle.scenario.label.clone(),
        curve_desc,
    );
    echo.weights = Some(weights);
    let summary = SweepSummary {
        points: points.len(),
        non_dominated: frontier.len(),
        failed,
        seed: args.optimizer.seed,
        warnings: bundle.warnings,
        config: echo,
    };
    io::write_json(&args.out.join("summary.json"), &summary)?;
    println!(
        "sweep: {} points, {} on the frontier, {} failed",
        summary.points, summary.non_dominated, summary.failed
    );
    Ok(())
}

pub fn run_forecast(args: &ForecastArgs) -> Result<()> {
    if args.window < 2 {
        return Err(Error::Config {
            violations: vec![format!("--window must be >= 2, got {}", args.window)],
        });
    }
    if args.horizon == 0 {
        return Err(Error::Config {
            violations: vec!["--horizon must be >= 1".to_string()],
        });
    }
    let full = io::read_history_csv(&args.history, args.allow_gaps)?;
    let window = full.tail(args.window);
    if window.len() < 2 {
        return Err(Error::invalid(
            "forecast",
            format!("history window has {} rows; need at least 2", window.len()),
        ));
    }
    let start = window.last_hour() + 1;
    let targets: Vec<i64> = (start..start + args.horizon as i64).collect();
    let posterior = gp_posterior(&window, &targets, &KernelParams::default())?;
    let samples = sample_posterior(&posterior, args.n_samples, args.seed)?;

    ensure_out_dir(&args.out)?;
    io::write_forecast_csv(&args.out.join("forecast.csv"), &posterior)?;
    io::write_samples_csv(&args.out.join("samples.csv"), &posterior, &samples)?;
    println!(
        "forecast: {} target hours, {} samples written to {}",
        targets.len(),
        samples.len(),
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct ValidationEntry {
    file: String,
    role: &'static str,
    ok: bool,
    detail: String,
}

#[derive(Debug, Serialize)]
pub struct ValidationReport {
    ok: bool,
    files: Vec<ValidationEntry>,
}

pub fn run_validate(args: &ValidateArgs) -> Result<bool> {
    let mut files = Vec::new();
    if let Some(path) = &args.price {
        let entry = match io::read_price_csv(path) {
            Ok(s) => ValidationEntry {
                file: path.display().to_string(),
                role: "prices",
                ok: true,
                detail: format!("{} hours", s.horizon()),
            },
            Err(e) => ValidationEntry {
                file: path.display().to_string(),
                role: "prices",
                ok: false,
                detail: e.to_string(),
            },
        };
        files.push(entry);
    }
    if let Some(path) = &args.history {
        let entry = match io::read_history_csv(path, args.allow_gaps) {
            Ok(s) => ValidationEntry {
                file: path.display().to_string(),
                role: "history",
                ok: true,
                detail: format!("{} hours", s.len()),
            },
            Err(e) => ValidationEntry {
                file: path.display().to_string(),
                role: "history",
                ok: false,
                detail: e.to_string(),
            },
        };
        files.push(entry);
    }
    if let Some(path) = &args.curve {
        let entry = match io::read_curve_csv(path) {
            Ok(c) => ValidationEntry {
                file: path.display().to_string(),
                role: "curve",
                ok: true,
                detail: format!("{} knots", c.knots().len()),
            },
            Err(e) => ValidationEntry {
                file: path.display().to_string(),
                role: "curve",
                ok: false,
                detail: e.to_string(),
            },
        };
        files.push(entry);
    }
    if files.is_empty() {
        return Err(Error::Config {
            violations: vec!["validate needs at least one of --price, --history, --curve".into()],
        });
    }
    let ok = files.iter().all(|f| f.ok);
    let report = ValidationReport { ok, files };
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(ok)
}
