//! `figure`, `sweep` and `fit`: run, then write every output in one final stage.

use std::fs;
use std::path::{Path, PathBuf};

use dirrec::experiment::figures::{
    figure_sweeps, grid_digest, FigureId, FigureOptions, LabeledSweep,
};
use dirrec::experiment::output::{write_aggregate_csv, write_cells_csv};
use dirrec::experiment::{ExperimentConfig, SweepContext, DEFAULT_MAX_ITERS, DEFAULT_TOLERANCE};
use dirrec::geometry::angle_l2p;
use dirrec::risk::{bound_bartlett, bound_sin, excess_01_on_sample};
use dirrec::surrogate::{
    empirical_phi_risk, expected_phi_risk, fit_constrained_least_squares, fit_projected_gradient,
    population_minimizer,
};
use dirrec::{ConstraintBall, Dataset, FitResult, LossKind};
use serde::Serialize;

use crate::manifest::{utc_now, ManifestConfig, RunManifest, TOOL_VERSION};
use crate::svg::{LineChart, Series};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct FigureRequest {
    pub figure: FigureId,
    pub out: PathBuf,
    pub options: FigureOptions,
}

impl FigureRequest {
    /// Command line that reproduces this request.
    pub fn command_line(&self) -> String {
        let o = &self.options;
        let mut s = format!(
            "dirrec figure {} --out {} --seed {}",
            self.figure,
            self.out.display(),
            o.base_seed
        );
        if let Some(r) = o.replicates {
            s += &format!(" --replicates {r}");
        }
        if let Some(t) = &o.train_sizes {
            let t: Vec<String> = t.iter().map(|n| n.to_string()).collect();
            s += &format!(" --train-sizes {}", t.join(","));
        }
        if let Some(e) = o.eval_size {
            s += &format!(" --eval-size {e}");
        }
        if let Some(b) = o.baseline_size {
            s += &format!(" --baseline-size {b}");
        }
        s
    }
}

fn manifest_configs(
    items: impl Iterator<Item = (String, ExperimentConfig)>,
) -> Vec<ManifestConfig> {
    items
        .map(|(cell_id, c)| ManifestConfig {
            cell_id,
            digest: c.digest(),
            canonical: c.to_canonical_string(),
        })
        .collect()
}

/// Creates the output directory and checks it accepts files before any work starts.
fn prepare_out_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let probe = out.join(".dirrec-write-test");
    fs::write(&probe, b"").map_err(|e| CliError::io(out, e))?;
    fs::remove_file(&probe).map_err(|e| CliError::io(&probe, e))
}

fn run_all(items: Vec<(String, String, ExperimentConfig)>) -> Result<Vec<LabeledSweep>, CliError> {
    items
        .into_iter()
        .map(|(figure, cell_id, config)| {
            Ok(LabeledSweep {
                figure,
                cell_id,
                result: SweepContext::new(config)?.run(),
            })
        })
        .collect()
}

fn panel(
    sweeps: &[LabeledSweep],
    title: String,
    y_label: &str,
    pick: fn(&dirrec::experiment::Aggregate) -> f64,
) -> LineChart {
    LineChart {
        title,
        x_label: "training sample size n".into(),
        y_label: y_label.into(),
        series: sweeps
            .iter()
            .map(|s| Series {
                label: s.cell_id.clone(),
                points: s
                    .result
                    .aggregates
                    .iter()
                    .filter(|a| a.n_ok > 0)
                    .map(|a| (a.train_size as f64, pick(a)))
                    .collect(),
            })
            .collect(),
    }
}

/// Tables and panels for a finished run. Returns the written paths.
pub fn write_outputs(
    out: &Path,
    prefix: &str,
    sweeps: &[LabeledSweep],
) -> Result<Vec<PathBuf>, CliError> {
    let mut cells = Vec::new();
    write_cells_csv(&mut cells, sweeps)?;
    let mut agg = Vec::new();
    write_aggregate_csv(&mut agg, sweeps)?;
    let a = panel(
        sweeps,
        format!("{prefix}: excess 0-1 risk"),
        "mean excess 0-1 risk",
        |a| a.excess_01.mean,
    );
    let b = panel(
        sweeps,
        format!("{prefix}: excess surrogate risk"),
        "mean excess phi-risk",
        |a| a.excess_phi.mean,
    );
    let files = [
        (format!("{prefix}_cells.csv"), cells),
        (format!("{prefix}_agg.csv"), agg),
        (format!("{prefix}_panel_a.svg"), a.render().into_bytes()),
        (format!("{prefix}_panel_b.svg"), b.render().into_bytes()),
    ];
    let mut paths = Vec::new();
    for (name, bytes) in files {
        let path = out.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

fn finish(
    out: &Path,
    command: String,
    config_digest: String,
    base_seed: u64,
    started_at: String,
    mut paths: Vec<PathBuf>,
    configs: Vec<ManifestConfig>,
) -> Result<RunManifest, CliError> {
    let manifest_path = out.join("manifest.json");
    paths.push(manifest_path.clone());
    let manifest = RunManifest {
        command,
        config_digest,
        base_seed,
        tool_version: TOOL_VERSION.to_string(),
        started_at,
        finished_at: utc_now(),
        output_paths: paths.iter().map(|p| p.display().to_string()).collect(),
        configs,
    };
    manifest.write(&manifest_path)?;
    Ok(manifest)
}

pub fn cmd_figure(req: &FigureRequest) -> Result<RunManifest, CliError> {
    let started_at = utc_now();
    let grid = figure_sweeps(req.figure, &req.options);
    for s in &grid {
        s.config.validate()?;
    }
    prepare_out_dir(&req.out)?;
    let digest = grid_digest(&grid);
    let configs = manifest_configs(grid.iter().map(|s| (s.cell_id.clone(), s.config.clone())));
    let items = grid
        .into_iter()
        .map(|s| (s.figure.name().to_string(), s.cell_id, s.config))
        .collect();
    let sweeps = run_all(items)?;
    let paths = write_outputs(&req.out, req.figure.name(), &sweeps)?;
    finish(
        &req.out,
        req.command_line(),
        digest,
        req.options.base_seed,
        started_at,
        paths,
        configs,
    )
}

pub fn cmd_sweep(config_path: &Path, out: &Path) -> Result<RunManifest, CliError> {
    let started_at = utc_now();
    let text = fs::read_to_string(config_path).map_err(|e| CliError::io(config_path, e))?;
    let config = ExperimentConfig::parse(&text)
        .and_then(|c| c.validate().map(|_| c))
        .map_err(|e| CliError::Validation(format!("{}: {e}", config_path.display())))?;
    prepare_out_dir(out)?;
    let cell_id = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sweep".into());
    let configs = manifest_configs(std::iter::once((cell_id.clone(), config.clone())));
    let digest = config.digest();
    let seed = config.base_seed;
    let sweeps = run_all(vec![("sweep".into(), cell_id, config)])?;
    let paths = write_outputs(out, "sweep", &sweeps)?;
    let command = format!(
        "dirrec sweep --config {} --out {}",
        config_path.display(),
        out.display()
    );
    finish(out, command, digest, seed, started_at, paths, configs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRequest {
    pub data: PathBuf,
    pub loss: LossKind,
    pub ball: ConstraintBall,
    pub max_iters: usize,
    pub tolerance: f64,
}

impl FitRequest {
    pub fn new(data: PathBuf, loss: LossKind, ball: ConstraintBall) -> Self {
        FitRequest {
            data,
            loss,
            ball,
            max_iters: DEFAULT_MAX_ITERS,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

/// Risk fields of a fit report; every field needing `p*` is `None` without it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRisk {
    pub empirical_phi_risk: f64,
    pub excess_01: Option<f64>,
    pub std_error_01: Option<f64>,
    pub excess_phi: Option<f64>,
    pub sine_theta: Option<f64>,
    pub fstar_norm: Option<f64>,
    pub bound_sin: Option<f64>,
    pub bound_bartlett: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub data: String,
    pub n: usize,
    pub dim: usize,
    pub loss: LossKind,
    /// `None` for an unbounded ball.
    pub radius: Option<f64>,
    pub fit: FitResult,
    pub risk: FitRisk,
}

/// Fits `data` and evaluates every available risk on the same sample.
pub fn fit_report(data: &Dataset, req: &FitRequest) -> Result<FitReport, CliError> {
    let fit = match req.loss {
        LossKind::Square => fit_constrained_least_squares(data, &req.ball)?,
        LossKind::Logistic => {
            fit_projected_gradient(data, req.loss, &req.ball, req.max_iters, req.tolerance)?
        }
    };
    let beta = &fit.beta_tilde;
    let mut risk = FitRisk {
        empirical_phi_risk: empirical_phi_risk(beta, data, req.loss)?,
        excess_01: None,
        std_error_01: None,
        excess_phi: None,
        sine_theta: None,
        fstar_norm: None,
        bound_sin: None,
        bound_bartlett: None,
    };
    if let (Some(pstar), Some(fstar)) = (data.true_probabilities.as_deref(), data.fstar()) {
        let (excess, se) = excess_01_on_sample(beta, &data.features, pstar)?;
        let reference = population_minimizer(&data.features, pstar, req.loss)?;
        let phi = expected_phi_risk(beta, &data.features, pstar, req.loss)?;
        let phi_ref = expected_phi_risk(&reference, &data.features, pstar, req.loss)?;
        let f = data.features.apply(beta.as_slice());
        risk.excess_01 = Some(excess);
        risk.std_error_01 = Some(se);
        risk.excess_phi = Some(phi - phi_ref);
        risk.sine_theta = match angle_l2p(&f, &fstar) {
            Ok(a) => Some(a.sine),
            Err(dirrec::Error::ZeroVector) => None,
            Err(e) => return Err(e.into()),
        };
        risk.fstar_norm =
            Some((fstar.iter().map(|x| x * x).sum::<f64>() / fstar.len().max(1) as f64).sqrt());
        risk.bound_sin = bound_sin(beta, data).ok();
        risk.bound_bartlett = Some(bound_bartlett(beta, data)?);
    }
    Ok(FitReport {
        data: String::new(),
        n: data.len(),
        dim: data.dim(),
        loss: req.loss,
        radius: req.ball.is_bounded().then(|| req.ball.radius()),
        fit,
        risk,
    })
}

pub fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Dataset::read_csv(std::io::BufReader::new(file))
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Runs `fit` and returns the report as pretty JSON; written to `report` when given.
pub fn cmd_fit(req: &FitRequest, report: Option<&Path>) -> Result<String, CliError> {
    let data = load_dataset(&req.data)?;
    let mut rep = fit_report(&data, req)?;
    rep.data = req.data.display().to_string();
    let mut json =
        serde_json::to_string_pretty(&rep).map_err(|e| CliError::Validation(e.to_string()))?;
    json.push('\n');
    if let Some(path) = report {
        fs::write(path, &json).map_err(|e| CliError::io(path, e))?;
    }
    Ok(json)
}
