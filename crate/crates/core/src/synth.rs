//! Synthetic data: feature laws, link functions and Bernoulli label draws.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`. Features use stream 0 and labels stream 1 of the same
//! seed, so a dataset's features equal `sample_features` under that seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::geometry::{dot, CovarianceMatrix, Matrix, Vector, MAX_DIM};

/// Golden-ratio increment of the replicate seed splitting rule.
pub const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// `base + i·0x9E3779B97F4A7C15` with wrapping arithmetic.
pub fn split_seed(base: u64, i: u64) -> u64 {
    base.wrapping_add(i.wrapping_mul(SEED_STRIDE))
}

pub const DEFAULT_CORRELATION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    UniformIid,
    GaussianIid,
    CorrelatedUniform,
    CorrelatedGaussian,
}

impl FeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::UniformIid => "uniform_iid",
            FeatureKind::GaussianIid => "gaussian_iid",
            FeatureKind::CorrelatedUniform => "correlated_uniform",
            FeatureKind::CorrelatedGaussian => "correlated_gaussian",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "uniform_iid" => FeatureKind::UniformIid,
            "gaussian_iid" => FeatureKind::GaussianIid,
            "correlated_uniform" => FeatureKind::CorrelatedUniform,
            "correlated_gaussian" => FeatureKind::CorrelatedGaussian,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown feature law `{other}`"
                )))
            }
        })
    }

    pub fn is_uniform(self) -> bool {
        matches!(
            self,
            FeatureKind::UniformIid | FeatureKind::CorrelatedUniform
        )
    }

    pub fn is_correlated(self) -> bool {
        matches!(
            self,
            FeatureKind::CorrelatedUniform | FeatureKind::CorrelatedGaussian
        )
    }
}

/// Law of the feature vector `X`.
///
/// Correlated kinds draw i.i.d. coordinates of the base law and mix them with
/// the lower Cholesky factor of the equicorrelation matrix
/// `(1 − ρ)I + ρ11ᵀ`, so `E[XXᵀ] = var · R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureLaw {
    pub kind: FeatureKind,
    pub dim: usize,
    /// Half-width for uniform kinds, standard deviation for gaussian kinds.
    pub scale: f64,
    /// Ignored by the i.i.d. kinds.
    pub correlation: f64,
}

impl FeatureLaw {
    pub fn uniform_iid(dim: usize, half_width: f64) -> Self {
        FeatureLaw {
            kind: FeatureKind::UniformIid,
            dim,
            scale: half_width,
            correlation: 0.0,
        }
    }

    pub fn gaussian_iid(dim: usize, sd: f64) -> Self {
        FeatureLaw {
            kind: FeatureKind::GaussianIid,
            dim,
            scale: sd,
            correlation: 0.0,
        }
    }

    pub fn correlated_uniform(dim: usize, half_width: f64, correlation: f64) -> Self {
        FeatureLaw {
            kind: FeatureKind::CorrelatedUniform,
            dim,
            scale: half_width,
            correlation,
        }
    }

    pub fn correlated_gaussian(dim: usize, sd: f64, correlation: f64) -> Self {
        FeatureLaw {
            kind: FeatureKind::CorrelatedGaussian,
            dim,
            scale: sd,
            correlation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(Error::InvalidConfig(format!(
                "feature dimension {} outside 1..={MAX_DIM}",
                self.dim
            )));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "feature scale must be positive, got {}",
                self.scale
            )));
        }
        if self.kind.is_correlated() {
            let rho = self.correlation;
            let lower = if self.dim > 1 {
                -1.0 / (self.dim as f64 - 1.0)
            } else {
                -1.0
            };
            if !(rho > lower.max(-1.0) && rho < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "correlation {rho} does not give a positive definite equicorrelation matrix in dimension {}",
                    self.dim
                )));
            }
        }
        Ok(())
    }

    /// Marginal variance of one base coordinate.
    pub fn coordinate_variance(&self) -> f64 {
        if self.kind.is_uniform() {
            self.scale * self.scale / 3.0
        } else {
            self.scale * self.scale
        }
    }

    /// Lower-triangular mixing factor (row-major), identity for i.i.d. kinds.
    pub fn mixing(&self) -> Vec<f64> {
        let d = self.dim;
        let mut l = vec![0.0; d * d];
        if !self.kind.is_correlated() {
            for i in 0..d {
                l[i * d + i] = 1.0;
            }
            return l;
        }
        let rho = self.correlation;
        let r = |i: usize, j: usize| if i == j { 1.0 } else { rho };
        for i in 0..d {
            for j in 0..=i {
                let s: f64 = (0..j).map(|k| l[i * d + k] * l[j * d + k]).sum();
                if i == j {
                    l[i * d + i] = (r(i, i) - s).max(0.0).sqrt();
                } else {
                    l[i * d + j] = (r(i, j) - s) / l[j * d + j];
                }
            }
        }
        l
    }

    /// Population second-moment matrix `E[XXᵀ]`.
    pub fn covariance(&self) -> CovarianceMatrix {
        let d = self.dim;
        let var = self.coordinate_variance();
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                m[i * d + j] = if i == j {
                    var
                } else if self.kind.is_correlated() {
                    var * self.correlation
                } else {
                    0.0
                };
            }
        }
        CovarianceMatrix::new(d, m).expect("equicorrelation matrix is PSD")
    }

    /// `sup_x |<beta, x>|` over the support (infinite for gaussian kinds).
    pub fn support_bound(&self, beta: &Vector) -> f64 {
        if !self.kind.is_uniform() {
            return if beta.as_slice().iter().all(|b| *b == 0.0) {
                0.0
            } else {
                f64::INFINITY
            };
        }
        let d = self.dim;
        let l = self.mixing();
        // x = L u with |u_k| <= h, so <beta, x> = <Lᵀbeta, u>
        (0..d)
            .map(|k| {
                (0..d)
                    .map(|i| l[i * d + k] * beta.as_slice()[i])
                    .sum::<f64>()
                    .abs()
            })
            .sum::<f64>()
            * self.scale
    }

    pub fn is_rotation_invariant(&self) -> bool {
        self.kind == FeatureKind::GaussianIid
    }
}

impl fmt::Display for FeatureLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.name())
    }
}

/// Draws `n` feature vectors, deterministic in `seed`.
pub fn sample_features(law: &FeatureLaw, n: usize, seed: u64) -> Matrix {
    let d = law.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * d);
    let mut base = vec![0.0; d];
    let mixing = law.kind.is_correlated().then(|| law.mixing());
    for _ in 0..n {
        for b in base.iter_mut() {
            *b = if law.kind.is_uniform() {
                law.scale * (2.0 * rng.random::<f64>() - 1.0)
            } else {
                law.scale * rng.sample::<f64, _>(StandardNormal)
            };
        }
        match &mixing {
            None => data.extend_from_slice(&base),
            Some(l) => {
                for i in 0..d {
                    data.push(dot(&l[i * d..i * d + i + 1], &base[..=i]));
                }
            }
        }
    }
    Matrix::from_rows(n, d, data).expect("shape is consistent")
}

/// Maps the linear index `<β*, x>` to `P(Y = +1 | x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkFunction {
    /// `p(z) = 1/2 + z`, defined on `[-1/2, 1/2]`.
    Linear,
    /// `p(z) = 1 / (1 + e^{-z})`.
    Logistic,
}

impl LinkFunction {
    pub fn name(self) -> &'static str {
        match self {
            LinkFunction::Linear => "linear",
            LinkFunction::Logistic => "logistic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(LinkFunction::Linear),
            "logistic" => Ok(LinkFunction::Logistic),
            other => Err(Error::InvalidConfig(format!("unknown link `{other}`"))),
        }
    }
}

pub fn apply_link(link: LinkFunction, z: f64) -> Result<f64> {
    match link {
        LinkFunction::Linear => {
            if !(z.abs() <= 0.5 + 1e-12) {
                return Err(Error::LinkDomain(z));
            }
            Ok((0.5 + z).clamp(0.0, 1.0))
        }
        LinkFunction::Logistic => Ok(sigmoid(z)),
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Where a dataset came from, when it was generated here.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub seed: u64,
    pub law: FeatureLaw,
    pub link: LinkFunction,
    pub beta_star: Vector,
}

/// Features, ±1 labels and (when known) the true `P(Y = +1 | x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<i8>,
    pub true_probabilities: Option<Vec<f64>>,
    pub provenance: Option<Provenance>,
}

impl Dataset {
    pub fn new(
        features: Matrix,
        labels: Vec<i8>,
        true_probabilities: Option<Vec<f64>>,
    ) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::DimensionMismatch {
                left: labels.len(),
                right: features.rows(),
            });
        }
        if let Some(i) = labels.iter().position(|y| *y != 1 && *y != -1) {
            return Err(Error::Domain(format!("label at row {i} is not -1 or +1")));
        }
        if let Some(p) = &true_probabilities {
            if p.len() != labels.len() {
                return Err(Error::DimensionMismatch {
                    left: p.len(),
                    right: labels.len(),
                });
            }
            if let Some(i) = p.iter().position(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Domain(format!("pstar at row {i} outside [0, 1]")));
            }
        }
        Ok(Dataset {
            features,
            labels,
            true_probabilities,
            provenance: None,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn labels_f64(&self) -> Vec<f64> {
        self.labels.iter().map(|&y| y as f64).collect()
    }

    /// `f* = 2p* − 1 = E[Y | X]` on each row.
    pub fn fstar(&self) -> Option<Vec<f64>> {
        self.true_probabilities
            .as_ref()
            .map(|p| p.iter().map(|p| 2.0 * p - 1.0).collect())
    }

    /// CSV with header `x1,...,xd,y[,pstar]`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::Domain(format!("csv write failed: {e}"));
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.dim()).map(|j| format!("x{j}")).collect();
        header.push("y".into());
        if self.true_probabilities.is_some() {
            header.push("pstar".into());
        }
        w.write_record(&header).map_err(io)?;
        for i in 0..self.len() {
            let mut rec: Vec<String> = self.features.row(i).iter().map(|v| v.to_string()).collect();
            rec.push(self.labels[i].to_string());
            if let Some(p) = &self.true_probabilities {
                rec.push(p[i].to_string());
            }
            w.write_record(&rec).map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::Domain(format!("csv write failed: {e}")))?;
        Ok(())
    }

    /// Reads the `write_csv` schema; `pstar` is optional.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let malformed = |line: u64, message: String| Error::MalformedData { line, message };
        let header = r
            .headers()
            .map_err(|e| malformed(1, e.to_string()))?
            .clone();
        let names: Vec<&str> = header.iter().map(str::trim).collect();
        let has_pstar = names.last() == Some(&"pstar");
        let y_col = if has_pstar {
            names.len().saturating_sub(2)
        } else {
            names.len().saturating_sub(1)
        };
        if names.len() < 2 || names.get(y_col) != Some(&"y") {
            return Err(malformed(1, "header must be x1,...,xd,y[,pstar]".into()));
        }
        for (j, name) in names[..y_col].iter().enumerate() {
            if *name != format!("x{}", j + 1) {
                return Err(malformed(
                    1,
                    format!("expected column x{}, found `{name}`", j + 1),
                ));
            }
        }
        let d = y_col;
        let mut data = Vec::new();
        let mut labels = Vec::new();
        let mut pstar = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                malformed(line, e.to_string())
            })?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            if rec.len() != names.len() {
                return Err(malformed(
                    line,
                    format!("expected {} fields, found {}", names.len(), rec.len()),
                ));
            }
            let num = |j: usize| -> Result<f64> {
                let s = rec[j].trim();
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        malformed(
                            line,
                            format!("field {} is not a finite number: `{s}`", j + 1),
                        )
                    })
            };
            for j in 0..d {
                data.push(num(j)?);
            }
            let y = num(d)?;
            if y != 1.0 && y != -1.0 {
                return Err(malformed(line, "labels must be -1 or +1".into()));
            }
            labels.push(y as i8);
            if has_pstar {
                let p = num(d + 1)?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(malformed(line, "pstar must lie in [0, 1]".into()));
                }
                pstar.push(p);
            }
        }
        if labels.is_empty() {
            return Err(malformed(1, "no observations".into()));
        }
        let n = labels.len();
        Dataset::new(
            Matrix::from_rows(n, d, data)?,
            labels,
            has_pstar.then_some(pstar),
        )
    }
}

/// Generates `n` observations with `P(Yᵢ = +1) = link(<β*, xᵢ>)`.
pub fn generate(
    law: &FeatureLaw,
    link: LinkFunction,
    beta_star: &Vector,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    law.validate()?;
    if beta_star.dim() != law.dim {
        return Err(Error::DimensionMismatch {
            left: beta_star.dim(),
            right: law.dim,
        });
    }
    if link == LinkFunction::Linear {
        let bound = law.support_bound(beta_star);
        if bound > 0.5 + 1e-12 {
            return Err(Error::InvalidBetaStar(bound));
        }
    }
    let features = sample_features(law, n, seed);
    let pstar = features
        .apply(beta_star.as_slice())
        .into_iter()
        .map(|z| apply_link(link, z))
        .collect::<Result<Vec<f64>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let labels = pstar
        .iter()
        .map(|&p| if rng.random::<f64>() < p { 1 } else { -1 })
        .collect();
    Ok(Dataset {
        features,
        labels,
        true_probabilities: Some(pstar),
        provenance: Some(Provenance {
            seed,
            law: law.clone(),
            link,
            beta_star: beta_star.clone(),
        }),
    })
}
