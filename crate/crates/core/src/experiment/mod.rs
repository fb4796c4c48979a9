//! Simulation sweeps: per-cell fit and evaluation, replicate aggregation and
//! the calibration verdict.
//!
//! Seeds for cell `(n, i)` are `split_seed(base, (n << 20) + 2i)` for the
//! training set and `+ 1` for the evaluation sample. The population baseline
//! uses `split_seed(base, 1)`.

mod config;
pub mod figures;
pub mod output;

pub use config::{
    ExperimentConfig, RadiusSpec, DEFAULT_BASELINE_SIZE, DEFAULT_MAX_ITERS, DEFAULT_REPLICATES,
    DEFAULT_TOLERANCE, DEFAULT_TRAIN_SIZES, MAX_REPLICATES, MIN_EVAL_SIZE,
};

use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use crate::error::{Error, Result};
use crate::geometry::Vector;
use crate::risk::{self, mean_and_se, RiskReport};
use crate::surrogate::{
    expected_phi_risk, fit_constrained_least_squares, fit_projected_gradient, population_minimizer,
    ConstraintBall, FitResult, LossKind,
};
use crate::synth::{apply_link, generate, sample_features, split_seed};

pub const VERDICT_FLOOR: f64 = 0.005;

pub fn train_seed(base: u64, train_size: usize, replicate: usize) -> u64 {
    split_seed(base, ((train_size as u64) << 20) + 2 * replicate as u64)
}

pub fn eval_seed(base: u64, train_size: usize, replicate: usize) -> u64 {
    split_seed(base, ((train_size as u64) << 20) + 2 * replicate as u64 + 1)
}

pub fn baseline_seed(base: u64) -> u64 {
    split_seed(base, 1)
}

/// Population-scale unconstrained surrogate minimizer for one DGP and loss.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Baseline {
    pub beta_effective: Vector,
}

static BASELINES: LazyLock<Mutex<HashMap<String, Arc<Baseline>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

fn baseline_key(cfg: &ExperimentConfig) -> String {
    format!(
        "{}|{}|{}|{}|{:?}|{}|{}|{}",
        cfg.law.kind.name(),
        cfg.law.scale,
        cfg.law.correlation,
        cfg.link.name(),
        cfg.beta_star.as_slice(),
        cfg.loss.name(),
        cfg.baseline_size,
        cfg.base_seed
    )
}

/// Computes (or fetches from the process-wide cache) the baseline minimizer.
pub fn population_baseline(cfg: &ExperimentConfig) -> Result<Arc<Baseline>> {
    let key = baseline_key(cfg);
    if let Some(b) = BASELINES.lock().expect("baseline cache poisoned").get(&key) {
        return Ok(b.clone());
    }
    let features = sample_features(&cfg.law, cfg.baseline_size, baseline_seed(cfg.base_seed));
    let pstar: Vec<f64> = features
        .apply(cfg.beta_star.as_slice())
        .into_iter()
        .map(|z| apply_link(cfg.link, z))
        .collect::<Result<_>>()?;
    let baseline = Arc::new(Baseline {
        beta_effective: population_minimizer(&features, &pstar, cfg.loss)?,
    });
    BASELINES
        .lock()
        .expect("baseline cache poisoned")
        .insert(key, baseline.clone());
    Ok(baseline)
}

/// Fit diagnostics kept per cell (the objective trace is reduced to a flag).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub beta_tilde: Vector,
    pub lagrange_multiplier: Option<f64>,
    pub active: bool,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub objective_value: f64,
    pub converged: bool,
    pub objective_monotone: bool,
}

impl From<&FitResult> for FitSummary {
    fn from(f: &FitResult) -> Self {
        FitSummary {
            beta_tilde: f.beta_tilde.clone(),
            lagrange_multiplier: f.lagrange_multiplier,
            active: f.active,
            iterations: f.iterations,
            final_gradient_norm: f.final_gradient_norm,
            objective_value: f.objective_value,
            converged: f.converged,
            objective_monotone: f.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRecord {
    pub train_size: usize,
    pub replicate: usize,
    pub outcome: std::result::Result<(FitSummary, RiskReport), String>,
}

impl CellRecord {
    pub fn ok(&self) -> Option<&(FitSummary, RiskReport)> {
        self.outcome.as_ref().ok()
    }

    pub fn error_code(&self) -> Option<&str> {
        self.outcome.as_ref().err().map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub train_size: usize,
    pub n_ok: usize,
    pub n_failed: usize,
    pub excess_01: MeanSe,
    pub excess_phi: MeanSe,
    pub sine_theta: MeanSe,
    pub bound_sin: MeanSe,
    pub bound_bartlett: MeanSe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Calibrated,
    NotCalibrated,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Calibrated => "calibrated",
            Verdict::NotCalibrated => "not_calibrated",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Calibrated below `max(0.005, 3·se)`, not calibrated above three times that.
pub fn calibration_verdict(mean_excess_01: f64, pooled_se: f64) -> Verdict {
    let threshold = VERDICT_FLOOR.max(3.0 * pooled_se);
    if mean_excess_01 < threshold {
        Verdict::Calibrated
    } else if mean_excess_01 > 3.0 * threshold {
        Verdict::NotCalibrated
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    /// Resolved constraint radius (infinite when unbounded).
    pub radius: f64,
    pub baseline: Baseline,
    pub cells: Vec<CellRecord>,
    pub aggregates: Vec<Aggregate>,
    pub verdict: Verdict,
}

/// Validated config plus its resolved baseline and ball, shared by all cells.
pub struct SweepContext {
    pub config: ExperimentConfig,
    pub baseline: Arc<Baseline>,
    pub ball: ConstraintBall,
}

impl SweepContext {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let baseline = population_baseline(&config)?;
        let ball = match config.radius {
            RadiusSpec::Unbounded => ConstraintBall::unbounded(),
            RadiusSpec::Absolute(r) => ConstraintBall::new(r)?,
            RadiusSpec::RelativeToOptimum(f) => {
                ConstraintBall::new(f * baseline.beta_effective.norm())?
            }
        };
        Ok(SweepContext {
            config,
            baseline,
            ball,
        })
    }

    /// Trains on the cell's seeded sample and evaluates on a fresh one.
    pub fn run_cell(&self, train_size: usize, replicate: usize) -> Result<(FitResult, RiskReport)> {
        let cfg = &self.config;
        let base = cfg.base_seed;
        let train = generate(
            &cfg.law,
            cfg.link,
            &cfg.beta_star,
            train_size,
            train_seed(base, train_size, replicate),
        )?;
        let fit = match cfg.loss {
            LossKind::Square => fit_constrained_least_squares(&train, &self.ball)?,
            LossKind::Logistic => {
                fit_projected_gradient(&train, cfg.loss, &self.ball, cfg.max_iters, cfg.tolerance)?
            }
        };
        let eval = generate(
            &cfg.law,
            cfg.link,
            &cfg.beta_star,
            cfg.eval_size,
            eval_seed(base, train_size, replicate),
        )?;
        let pstar = eval
            .true_probabilities
            .as_deref()
            .expect("generated data carries p*");
        let phi_baseline = expected_phi_risk(
            &self.baseline.beta_effective,
            &eval.features,
            pstar,
            cfg.loss,
        )?;
        let report = risk::evaluate(
            &fit.beta_tilde,
            &eval,
            cfg.loss,
            phi_baseline,
            cfg.margin_params.as_ref(),
        )?;
        Ok((fit, report))
    }

    pub fn run(&self) -> SweepResult {
        let cfg = &self.config;
        let keys: Vec<(usize, usize)> = cfg
            .train_sizes
            .iter()
            .flat_map(|&n| (0..cfg.replicates).map(move |i| (n, i)))
            .collect();
        let cells: Vec<CellRecord> = keys
            .par_iter()
            .map(|&(train_size, replicate)| CellRecord {
                train_size,
                replicate,
                outcome: self
                    .run_cell(train_size, replicate)
                    .map(|(fit, report)| (FitSummary::from(&fit), report))
                    .map_err(|e| e.code().to_string()),
            })
            .collect();
        let aggregates: Vec<Aggregate> = cfg
            .train_sizes
            .iter()
            .map(|&n| aggregate(n, cells.iter().filter(|c| c.train_size == n)))
            .collect();
        let verdict = aggregates
            .last()
            .filter(|a| a.n_ok > 0)
            .map(|a| calibration_verdict(a.excess_01.mean, a.excess_01.se))
            .unwrap_or(Verdict::Inconclusive);
        SweepResult {
            config: cfg.clone(),
            radius: self.ball.radius(),
            baseline: (*self.baseline).clone(),
            cells,
            aggregates,
            verdict,
        }
    }
}

fn aggregate<'a>(train_size: usize, cells: impl Iterator<Item = &'a CellRecord>) -> Aggregate {
    let cells: Vec<&CellRecord> = cells.collect();
    let ok: Vec<&RiskReport> = cells
        .iter()
        .filter_map(|c| c.ok().map(|(_, r)| r))
        .collect();
    let stat = |f: fn(&RiskReport) -> f64| {
        let (mean, se) = mean_and_se(ok.iter().map(|r| f(r)));
        MeanSe { mean, se }
    };
    Aggregate {
        train_size,
        n_ok: ok.len(),
        n_failed: cells.len() - ok.len(),
        excess_01: stat(|r| r.excess_01),
        excess_phi: stat(|r| r.excess_phi),
        sine_theta: stat(|r| r.sine_theta),
        bound_sin: stat(|r| r.bound_sin),
        bound_bartlett: stat(|r| r.bound_bartlett),
    }
}

/// One cell, deterministic in `(config, train_size, replicate_index)`.
pub fn run_cell(
    config: &ExperimentConfig,
    train_size: usize,
    replicate_index: usize,
) -> Result<(FitResult, RiskReport)> {
    if replicate_index >= MAX_REPLICATES {
        return Err(Error::InvalidConfig(format!(
            "replicate index must be below {MAX_REPLICATES}"
        )));
    }
    SweepContext::new(config.clone())?.run_cell(train_size, replicate_index)
}

/// All `(train_size × replicate)` cells of a config; cell failures are recorded, not raised.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    Ok(SweepContext::new(config.clone())?.run())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{FeatureLaw, LinkFunction};

    #[test]
    fn verdict_rule() {
        assert_eq!(calibration_verdict(0.001, 0.0001), Verdict::Calibrated);
        assert_eq!(calibration_verdict(0.01, 0.0001), Verdict::Inconclusive);
        assert_eq!(calibration_verdict(0.016, 0.0001), Verdict::NotCalibrated);
        // noisy sweeps raise the threshold
        assert_eq!(calibration_verdict(0.02, 0.01), Verdict::Calibrated);
    }

    #[test]
    fn seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for n in [100, 316, 1000] {
            for i in 0..50 {
                assert!(seen.insert(train_seed(7, n, i)));
                assert!(seen.insert(eval_seed(7, n, i)));
            }
        }
        assert!(!seen.contains(&baseline_seed(7)));
    }

    fn small_config() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(
            FeatureLaw::uniform_iid(2, 0.125),
            LinkFunction::Linear,
            Vector::from([1.0, -3.0]),
            LossKind::Square,
            RadiusSpec::RelativeToOptimum(0.5),
        );
        cfg.train_sizes = vec![200, 2000];
        cfg.replicates = 4;
        cfg.eval_size = 5000;
        cfg.baseline_size = 50_000;
        cfg
    }

    #[test]
    fn sweep_is_deterministic_and_aggregates_match() {
        let cfg = small_config();
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(a, b);
        for agg in &a.aggregates {
            let vals: Vec<f64> = a
                .cells
                .iter()
                .filter(|c| c.train_size == agg.train_size)
                .map(|c| c.ok().unwrap().1.excess_01)
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            assert!((mean - agg.excess_01.mean).abs() < 1e-12);
            assert_eq!(agg.n_failed, 0);
        }
        // the tight radius binds
        assert!(a.cells.iter().all(|c| c.ok().unwrap().0.active));
    }

    #[test]
    fn run_cell_matches_sweep_cell() {
        let cfg = small_config();
        let sweep = run_sweep(&cfg).unwrap();
        let (fit, report) = run_cell(&cfg, 2000, 3).unwrap();
        let cell = sweep
            .cells
            .iter()
            .find(|c| c.train_size == 2000 && c.replicate == 3)
            .unwrap();
        assert_eq!(cell.ok().unwrap().1, report);
        assert_eq!(cell.ok().unwrap().0.beta_tilde, fit.beta_tilde);
    }

    #[test]
    fn invalid_config_rejected_before_running() {
        let mut cfg = small_config();
        cfg.tolerance = 0.0;
        assert!(run_sweep(&cfg).is_err());
    }
}
