//! Experiment drivers: progressive-validation classification, online
//! logistic regression, the adversarial separation sweep, and the bound audit.

mod config;
mod progressive;

use std::fmt::Write as _;

use crate::adversarial::{best_fixed_eta_regret, log_grid, run_instance, BadFamily};
use crate::data::synthetic::{ctr, sentiment};
use crate::data::{format_sig6, load_libsvm, shuffle, write_results_csv, Dataset, ResultRow};
use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::learners::{AdaptiveGlobalOgd, DiameterEstimate, Learner, PassiveAggressive, PerCoordinateOgd};
use crate::losses::{L2Scope, LossFunction};
use crate::regret::audit::full_battery;
use crate::regret::{bound_percoord, loglog_slope, static_optimum, ComparatorMode, RegretLedger};

pub use config::{Algorithm, DataSource, EtaGrid, Experiment, RunConfig};
pub use progressive::{progressive_pass, PassSummary};

/// Output text plus whether every requested check passed (and every
/// comparator converged). The CLI maps `success` to its exit status.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub text: String,
    pub success: bool,
}

pub fn run(config: &RunConfig) -> Result<Report> {
    let config = config.clone().resolve();
    match config.experiment {
        Experiment::Classify => run_classify(&config),
        Experiment::Logreg => run_logreg(&config),
        Experiment::Separation => run_separation(&config),
        Experiment::BoundsAudit => run_bounds_audit(&config),
    }
}

pub fn load_dataset(source: &DataSource) -> Result<Dataset> {
    match source {
        DataSource::File(path) => load_libsvm(path),
        DataSource::SyntheticCtr(spec) => ctr(spec),
        DataSource::SyntheticSentiment(spec) => sentiment(spec),
    }
}

fn prepared_dataset(config: &RunConfig) -> Result<Dataset> {
    let source = config
        .dataset
        .as_ref()
        .ok_or_else(|| Error::Usage("no dataset given".into()))?;
    let ds = load_dataset(source)?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(if config.shuffle { shuffle(&ds, config.seed) } else { ds })
}

fn require(value: Option<f64>, name: &str) -> Result<f64> {
    value.ok_or_else(|| Error::Usage(format!("{name} is not set")))
}

fn check_algorithms(config: &RunConfig, allowed: &[Algorithm]) -> Result<()> {
    if config.algorithm_list().is_empty() {
        return Err(Error::Usage("no algorithms requested".into()));
    }
    if let Some(a) = config.algorithm_list().iter().find(|a| !allowed.contains(a)) {
        return Err(Error::Usage(format!(
            "algorithm `{a}` is not available for {}",
            config.experiment.as_str()
        )));
    }
    Ok(())
}

fn learner_for(
    algorithm: Algorithm,
    domain: &BoxDomain,
    config: &RunConfig,
) -> Result<Box<dyn Learner + Send>> {
    Ok(match algorithm {
        Algorithm::Global => Box::new(AdaptiveGlobalOgd::new(
            domain.clone(),
            require(config.scale_global, "scale-global")?,
            DiameterEstimate::Online,
        )?),
        Algorithm::PerCoord => Box::new(PerCoordinateOgd::new(
            domain.clone(),
            require(config.scale_per_coord, "scale-per-coord")?,
        )?),
        Algorithm::Pa => Box::new(PassiveAggressive::new()),
    })
}

fn scale_of(algorithm: Algorithm, config: &RunConfig) -> f64 {
    match algorithm {
        Algorithm::Global => config.scale_global.unwrap_or(f64::NAN),
        Algorithm::PerCoord => config.scale_per_coord.unwrap_or(f64::NAN),
        Algorithm::Pa => 1.0,
    }
}

struct Timer(Option<std::time::Instant>);

impl Timer {
    fn start(enabled: bool) -> Self {
        Timer(enabled.then(std::time::Instant::now))
    }
    fn ms(&self) -> Option<f64> {
        self.0.map(|t| t.elapsed().as_secs_f64() * 1e3)
    }
}

/// One shuffled pass with hinge loss per algorithm, scoring each example
/// before the learner trains on it.
pub fn run_classify(config: &RunConfig) -> Result<Report> {
    check_algorithms(config, &[Algorithm::Global, Algorithm::PerCoord, Algorithm::Pa])?;
    let radius = require(config.radius, "radius")?;
    let ds = prepared_dataset(config)?;
    let domain = BoxDomain::symmetric(radius, Some(ds.dim))?;
    let mut rows = Vec::new();
    for &algorithm in config.algorithm_list() {
        let timer = Timer::start(config.timing);
        let mut learner = learner_for(algorithm, &domain, config)?;
        let mut ledger = RegretLedger::new();
        let summary = progressive_pass(&mut learner, &ds.examples, LossFunction::hinge, &mut ledger)?;
        ledger.waive_comparator();
        log::info!(
            "{}: avg hinge {:.4}, mistakes {:.4}",
            algorithm,
            summary.avg_hinge_loss(),
            summary.mistake_fraction()
        );
        rows.push(ResultRow {
            dataset: ds.metadata.name.clone(),
            algorithm: algorithm.to_string(),
            scale_factor: scale_of(algorithm, config),
            radius: (algorithm != Algorithm::Pa).then_some(radius),
            lambda: None,
            seed: config.seed,
            ledger,
            avg_hinge_loss: Some(summary.avg_hinge_loss()),
            mistake_fraction: Some(summary.mistake_fraction()),
            wall_ms: timer.ms(),
        });
    }
    Ok(Report {
        text: write_results_csv(&rows, &config.to_pairs())?,
        success: true,
    })
}

/// One online pass of logistic loss plus an L2 penalty on the active features;
/// regret is measured against the iteratively computed static optimum.
pub fn run_logreg(config: &RunConfig) -> Result<Report> {
    check_algorithms(config, &[Algorithm::Global, Algorithm::PerCoord])?;
    let radius = require(config.radius, "radius")?;
    let lambda = require(config.lambda, "lambda")?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Usage(format!("lambda must be finite and non-negative, got {lambda}")));
    }
    let ds = prepared_dataset(config)?;
    let domain = BoxDomain::symmetric(radius, Some(ds.dim))?;
    let loss = |e| LossFunction::Logistic {
        example: e,
        l2: lambda,
        scope: L2Scope::Active,
    };
    let losses: Vec<LossFunction<'_>> = ds.examples.iter().map(loss).collect();
    let comparator = static_optimum(&losses, &domain, &ComparatorMode::iterative(1.0))?;
    log::info!(
        "comparator loss {} after {} passes (converged: {})",
        comparator.loss,
        comparator.passes,
        comparator.converged
    );

    let mut rows = Vec::new();
    for &algorithm in config.algorithm_list() {
        let timer = Timer::start(config.timing);
        let mut learner = learner_for(algorithm, &domain, config)?;
        let mut ledger = RegretLedger::new();
        progressive_pass(&mut learner, &ds.examples, loss, &mut ledger)?;
        ledger.resolve(comparator.clone());
        rows.push(ResultRow {
            dataset: ds.metadata.name.clone(),
            algorithm: algorithm.to_string(),
            scale_factor: scale_of(algorithm, config),
            radius: Some(radius),
            lambda: Some(lambda),
            seed: config.seed,
            ledger,
            avg_hinge_loss: None,
            mistake_fraction: None,
            wall_ms: timer.ms(),
        });
    }
    Ok(Report {
        text: write_results_csv(&rows, &config.to_pairs())?,
        success: comparator.converged,
    })
}

/// One row of the separation sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationRow {
    pub t0: usize,
    pub rounds: usize,
    pub algorithm: Algorithm,
    /// Grid-best fixed rate (global) or the scale factor (per-coord).
    pub eta: f64,
    pub regret: f64,
    /// Per-coordinate bound (per-coord) or the analytical lower bound at the
    /// grid-best rate (global).
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationResult {
    pub rows: Vec<SeparationRow>,
    pub slope_global: Option<f64>,
    pub slope_per_coord: Option<f64>,
}

impl SeparationResult {
    pub fn slope(&self, algorithm: Algorithm) -> Option<f64> {
        match algorithm {
            Algorithm::Global => self.slope_global,
            Algorithm::PerCoord => self.slope_per_coord,
            Algorithm::Pa => None,
        }
    }

    /// Per-coordinate regret stays within its bound on every instance.
    pub fn per_coord_within_bound(&self) -> bool {
        self.rows
            .iter()
            .filter(|r| r.algorithm == Algorithm::PerCoord)
            .all(|r| r.regret <= r.bound + 1e-6)
    }
}

pub fn separation(config: &RunConfig) -> Result<SeparationResult> {
    check_algorithms(config, &[Algorithm::Global, Algorithm::PerCoord])?;
    if let Some(&t0) = config.t0.iter().find(|&&t| t < 8) {
        return Err(Error::Usage(format!("t0 must be at least 8, got {t0}")));
    }
    if config.t0.is_empty() {
        return Err(Error::Usage("t0 list is empty".into()));
    }
    let span = config.t0.iter().max().unwrap() / config.t0.iter().min().unwrap();
    if config.t0.len() < 3 || span < 100 {
        log::warn!("slopes need at least 3 values of t0 spanning 2 decades");
    }
    let grid = log_grid(config.eta_grid.min, config.eta_grid.max, config.eta_grid.points);
    let mut rows = Vec::new();
    for &t0 in &config.t0 {
        let instance = BadFamily::canonical(t0, config.epsilon)?;
        let rounds = instance.total_rounds();
        for &algorithm in config.algorithm_list() {
            let row = match algorithm {
                Algorithm::Global => {
                    let (eta, regret) = best_fixed_eta_regret(&instance, &grid)?;
                    SeparationRow {
                        t0,
                        rounds,
                        algorithm,
                        eta,
                        regret,
                        bound: instance.fixed_rate_lower_bound(eta),
                    }
                }
                Algorithm::PerCoord => {
                    let scale = require(config.scale_per_coord, "scale-per-coord")?;
                    let domain = instance.domain();
                    let mut learner = PerCoordinateOgd::new(domain.clone(), scale)?;
                    let run = run_instance(&instance, &mut learner)?;
                    let bound = bound_percoord(|i| domain.diameter(i), &run.gradients).total;
                    SeparationRow {
                        t0,
                        rounds,
                        algorithm,
                        eta: scale,
                        regret: run.regret,
                        bound,
                    }
                }
                Algorithm::Pa => unreachable!("rejected above"),
            };
            log::info!("t0 {t0}: {} regret {}", algorithm, row.regret);
            rows.push(row);
        }
    }
    let slope = |a: Algorithm| {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.algorithm == a)
            .map(|r| (r.rounds as f64, r.regret))
            .collect();
        if pts.iter().all(|p| p.1 > 0.0) {
            loglog_slope(&pts)
        } else {
            None
        }
    };
    Ok(SeparationResult {
        slope_global: slope(Algorithm::Global),
        slope_per_coord: slope(Algorithm::PerCoord),
        rows,
    })
}

/// CSV of regret per instance and algorithm, with the fitted log-log slope of
/// regret against `T` repeated on each row of an algorithm (empty with fewer
/// than 3 instances).
pub fn run_separation(config: &RunConfig) -> Result<Report> {
    let result = separation(config)?;
    let mut text = String::new();
    for (k, v) in config.to_pairs() {
        let _ = writeln!(text, "# {k}={v}");
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t0", "T", "algorithm", "eta", "regret", "bound", "slope"])?;
    for r in &result.rows {
        w.write_record([
            r.t0.to_string(),
            r.rounds.to_string(),
            r.algorithm.to_string(),
            format_sig6(r.eta),
            format_sig6(r.regret),
            format_sig6(r.bound),
            result.slope(r.algorithm).map(format_sig6).unwrap_or_default(),
        ])?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    text.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    Ok(Report {
        text,
        success: result.per_coord_within_bound(),
    })
}

/// The full randomised bound battery, one PASS/FAIL line per property.
pub fn run_bounds_audit(config: &RunConfig) -> Result<Report> {
    let outcomes = full_battery(config.seed);
    let mut text = format!("# seed={}\n", config.seed);
    for o in &outcomes {
        if config.timing {
            let _ = writeln!(text, "{}", o.timed());
        } else {
            let _ = writeln!(text, "{o}");
        }
    }
    Ok(Report {
        text,
        success: outcomes.iter().all(|o| o.passed()),
    })
}
