//! Fixed config grids for the three simulation figures.
//!
//! * `fig4`: square loss, linear link, `β* = (1, −3)`, `U(−1/8, 1/8)` features,
//!   uncorrelated and equicorrelated (ρ = 0.8), radius ∞ / ½‖β_eff‖ / ¼‖β_eff‖.
//! * `fig5`: the same grid with logistic loss.
//! * `fig6`: logistic link, both losses, radius ½‖β_eff‖, with gaussian
//!   features and `β* ∈ {(1, 1), (1, −3)}` and `U(−1, 1)` features with `β* = (1, −3)`.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt;
use std::str::FromStr;

use super::{ExperimentConfig, RadiusSpec, SweepContext, SweepResult};
use crate::error::{Error, Result};
use crate::geometry::Vector;
use crate::surrogate::LossKind;
use crate::synth::{FeatureLaw, LinkFunction, DEFAULT_CORRELATION};

pub const FIG4_HALF_WIDTH: f64 = 0.125;
pub const TIGHT_FRACTIONS: [f64; 2] = [0.5, 0.25];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig4,
    Fig5,
    Fig6,
}

impl FigureId {
    pub const ALL: [FigureId; 3] = [FigureId::Fig4, FigureId::Fig5, FigureId::Fig6];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig4" => Ok(FigureId::Fig4),
            "fig5" => Ok(FigureId::Fig5),
            "fig6" => Ok(FigureId::Fig6),
            other => Err(Error::InvalidConfig(format!(
                "unknown figure `{other}` (expected fig4, fig5 or fig6)"
            ))),
        }
    }
}

/// Overrides applied to every sweep of a figure grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FigureOptions {
    pub base_seed: u64,
    pub replicates: Option<usize>,
    pub train_sizes: Option<Vec<usize>>,
    pub eval_size: Option<usize>,
    pub baseline_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureSweep {
    pub figure: FigureId,
    pub cell_id: String,
    pub config: ExperimentConfig,
}

/// A finished sweep with the labels written into the CSV tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledSweep {
    pub figure: String,
    pub cell_id: String,
    pub result: SweepResult,
}

fn radius_tag(r: &RadiusSpec) -> String {
    match r {
        RadiusSpec::Unbounded => "r_inf".into(),
        RadiusSpec::Absolute(v) => format!("r_{v}"),
        RadiusSpec::RelativeToOptimum(f) => format!("r_tight{f}"),
    }
}

fn linear_link_grid(figure: FigureId, loss: LossKind) -> Vec<FigureSweep> {
    let beta = Vector::from([1.0, -3.0]);
    let laws = [
        ("uncorr", FeatureLaw::uniform_iid(2, FIG4_HALF_WIDTH)),
        (
            "corr",
            FeatureLaw::correlated_uniform(2, FIG4_HALF_WIDTH, DEFAULT_CORRELATION),
        ),
    ];
    let radii = [
        RadiusSpec::Unbounded,
        RadiusSpec::RelativeToOptimum(TIGHT_FRACTIONS[0]),
        RadiusSpec::RelativeToOptimum(TIGHT_FRACTIONS[1]),
    ];
    let mut out = Vec::new();
    for (tag, law) in &laws {
        for r in &radii {
            out.push(FigureSweep {
                figure,
                cell_id: format!("{tag}_{}", radius_tag(r)),
                config: ExperimentConfig::new(
                    law.clone(),
                    LinkFunction::Linear,
                    beta.clone(),
                    loss,
                    *r,
                ),
            });
        }
    }
    out
}

fn logistic_link_grid() -> Vec<FigureSweep> {
    let cases = [
        (
            "gauss_sym",
            FeatureLaw::gaussian_iid(2, 1.0),
            Vector::from([1.0, 1.0]),
        ),
        (
            "gauss_asym",
            FeatureLaw::gaussian_iid(2, 1.0),
            Vector::from([1.0, -3.0]),
        ),
        (
            "unif_asym",
            FeatureLaw::uniform_iid(2, 1.0),
            Vector::from([1.0, -3.0]),
        ),
    ];
    let radius = RadiusSpec::RelativeToOptimum(TIGHT_FRACTIONS[0]);
    let mut out = Vec::new();
    for loss in [LossKind::Square, LossKind::Logistic] {
        for (tag, law, beta) in &cases {
            out.push(FigureSweep {
                figure: FigureId::Fig6,
                cell_id: format!("{}_{tag}", loss.name()),
                config: ExperimentConfig::new(
                    law.clone(),
                    LinkFunction::Logistic,
                    beta.clone(),
                    loss,
                    radius,
                ),
            });
        }
    }
    out
}

/// The documented config grid for a figure, with overrides applied.
pub fn figure_sweeps(figure: FigureId, options: &FigureOptions) -> Vec<FigureSweep> {
    let mut sweeps = match figure {
        FigureId::Fig4 => linear_link_grid(figure, LossKind::Square),
        FigureId::Fig5 => linear_link_grid(figure, LossKind::Logistic),
        FigureId::Fig6 => logistic_link_grid(),
    };
    for s in &mut sweeps {
        let c = &mut s.config;
        c.base_seed = options.base_seed;
        if let Some(r) = options.replicates {
            c.replicates = r;
        }
        if let Some(t) = &options.train_sizes {
            c.train_sizes = t.clone();
        }
        if let Some(e) = options.eval_size {
            c.eval_size = e;
        }
        if let Some(b) = options.baseline_size {
            c.baseline_size = b;
        }
    }
    sweeps
}

/// SHA-256 over the canonical configs of a grid, in order.
pub fn grid_digest(sweeps: &[FigureSweep]) -> String {
    let mut h = Sha256::new();
    for s in sweeps {
        h.update(s.cell_id.as_bytes());
        h.update(b"\n");
        h.update(s.config.to_canonical_string().as_bytes());
    }
    hex::encode(h.finalize())
}

/// Runs every sweep of the figure grid in order.
pub fn reproduce_figure(figure: FigureId, options: &FigureOptions) -> Result<Vec<LabeledSweep>> {
    figure_sweeps(figure, options)
        .into_iter()
        .map(|s| {
            Ok(LabeledSweep {
                figure: s.figure.name().to_string(),
                cell_id: s.cell_id,
                result: SweepContext::new(s.config)?.run(),
            })
        })
        .collect()
}
