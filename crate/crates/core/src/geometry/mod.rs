//! Scale-invariant angles between linear predictors, covariance estimation
//! and the spectral bound on how far a norm constraint can rotate the
//! square-loss minimizer.

mod eigen;

pub use eigen::{jacobi_eigen, SymmetricEigen};

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Vectors with norm below this are treated as zero.
pub const ZERO_NORM: f64 = 1e-300;
/// Relative band around `<u, v> = 0` reported as exactly orthogonal.
pub const ORTHOGONAL_BAND: f64 = 1e-14;
pub const MAX_DIM: usize = 32;

/// Dense real vector with finite entries and at least one coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::DimensionMismatch { left: 0, right: 1 });
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Vector(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector dimension must be positive");
        Vector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn scaled(&self, c: f64) -> Vector {
        Vector(self.0.iter().map(|v| v * c).collect())
    }

    pub fn neg(&self) -> Vector {
        self.scaled(-1.0)
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(a: [f64; N]) -> Self {
        Vector::new(a.to_vec()).expect("vector literal must be nonempty and finite")
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Row-major `rows × cols` matrix; feature matrices store one observation per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                left: data.len(),
                right: rows * cols,
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.cols.max(1))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `X β`, one entry per row.
    pub fn apply(&self, beta: &[f64]) -> Vec<f64> {
        debug_assert_eq!(beta.len(), self.cols);
        self.iter_rows().map(|r| dot(r, beta)).collect()
    }

    /// `Xᵀ w / n`.
    pub fn mean_weighted_rows(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (r, w) in self.iter_rows().zip(weights) {
            for (o, x) in out.iter_mut().zip(r) {
                *o += w * x;
            }
        }
        let n = self.rows.max(1) as f64;
        out.iter_mut().for_each(|o| *o /= n);
        out
    }
}

/// Symmetric positive semidefinite `dim × dim` matrix (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl CovarianceMatrix {
    /// Validates symmetry (1e-12 relative) and PSD up to `-1e-10·trace/d`.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        let eig = jacobi_eigen(dim, &data)?;
        let trace: f64 = (0..dim).map(|i| data[i * dim + i]).sum();
        let min = *eig.values.last().expect("dim >= 1");
        if min < -1e-10 * (trace.abs() / dim as f64) {
            return Err(Error::NotPsd(min));
        }
        Ok(CovarianceMatrix { dim, data })
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let d = values.len();
        let mut data = vec![0.0; d * d];
        for (i, v) in values.iter().enumerate() {
            data[i * d + i] = *v;
        }
        CovarianceMatrix::new(d, data)
    }

    pub fn identity(dim: usize) -> Self {
        CovarianceMatrix::diagonal(&vec![1.0; dim]).expect("identity is PSD")
    }

    pub(crate) fn from_accumulated(dim: usize, data: Vec<f64>) -> Self {
        CovarianceMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn scaled(&self, a: f64) -> CovarianceMatrix {
        CovarianceMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * a).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.dim)
            .map(|r| dot(r, v))
            .collect()
    }

    /// `vᵀ Σ v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.mul_vec(v))
    }

    pub fn eigen(&self) -> SymmetricEigen {
        jacobi_eigen(self.dim, &self.data).expect("validated symmetric on construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerProductSign {
    Positive,
    Negative,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleReport {
    pub angle_rad: f64,
    pub sine: f64,
    pub cosine: f64,
    pub inner_product_sign: InnerProductSign,
}

impl AngleReport {
    /// `inf_{t>0} ‖t u − v/‖v‖‖`: the sine for acute pairs, 1 otherwise
    /// (the infimum over positive rescalings is attained as `t → 0`).
    pub fn rescaling_distance(&self) -> f64 {
        match self.inner_product_sign {
            InnerProductSign::Positive => self.sine,
            _ => 1.0,
        }
    }
}

/// `2·atan2(‖û − v̂‖, ‖û + v̂‖)` equals `arccos(cos θ)` but keeps full
/// precision near 0 and π where arccos is ill-conditioned.
fn angle_between(u: &[f64], v: &[f64]) -> Result<AngleReport> {
    let uu = dot(u, u);
    let vv = dot(v, v);
    let nu = uu.sqrt();
    let nv = vv.sqrt();
    if !(nu >= ZERO_NORM && nv >= ZERO_NORM) {
        return Err(Error::ZeroVector);
    }
    let cosine = (dot(u, v) / nu / nv).clamp(-1.0, 1.0);
    if cosine.abs() <= ORTHOGONAL_BAND {
        return Ok(AngleReport {
            angle_rad: FRAC_PI_2,
            sine: 1.0,
            cosine: 0.0,
            inner_product_sign: InnerProductSign::Zero,
        });
    }
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        let (a, b) = (a / nu, b / nv);
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    let angle_rad = 2.0 * diff.sqrt().atan2(sum.sqrt());
    Ok(AngleReport {
        angle_rad,
        sine: angle_rad.sin().clamp(0.0, 1.0),
        cosine,
        inner_product_sign: if cosine > 0.0 {
            InnerProductSign::Positive
        } else {
            InnerProductSign::Negative
        },
    })
}

fn check_same_len(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    Ok(())
}

/// Euclidean angle `arccos(<u,v> / ‖u‖‖v‖)`.
pub fn angle_euclidean(u: &Vector, v: &Vector) -> Result<AngleReport> {
    check_same_len(u.as_slice(), v.as_slice())?;
    angle_between(u.as_slice(), v.as_slice())
}

/// Angle under the empirical `L²(P̂)` inner product `(1/n) Σ uᵢvᵢ`, where
/// `u_values` and `v_values` are two functions evaluated on the same sample.
pub fn angle_l2p(u_values: &[f64], v_values: &[f64]) -> Result<AngleReport> {
    check_same_len(u_values, v_values)?;
    if u_values.is_empty() {
        return Err(Error::ZeroVector);
    }
    // the 1/n weight cancels once both sides are normalized
    angle_between(u_values, v_values)
}

/// Second-moment matrix `(1/n) Σ xᵢxᵢᵀ` (features are taken as de-meaned).
pub fn estimate_covariance(samples: &Matrix) -> CovarianceMatrix {
    let d = samples.cols();
    let mut acc = vec![0.0; d * d];
    for row in samples.iter_rows() {
        for i in 0..d {
            let xi = row[i];
            for j in i..d {
                acc[i * d + j] += xi * row[j];
            }
        }
    }
    let n = samples.rows().max(1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = acc[i * d + j] / n;
            acc[i * d + j] = v;
            acc[j * d + i] = v;
        }
    }
    CovarianceMatrix::from_accumulated(d, acc)
}

/// All eigenvalues in descending order.
pub fn eigenvalues_symmetric(m: &CovarianceMatrix) -> Result<Vec<f64>> {
    Ok(jacobi_eigen(m.dim(), m.as_slice())?.values)
}

/// `inf_{a≥0} ‖aΣ − I‖_op = (σ_max − σ_min)/(σ_max + σ_min)`.
///
/// Negative eigenvalues at rounding level are clamped to zero.
pub fn calibration_bound(sigma: &CovarianceMatrix) -> Result<f64> {
    let values = eigenvalues_symmetric(sigma)?;
    let max = values[0];
    if max <= 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let min = values.last().copied().unwrap_or(max).max(0.0);
    Ok(((max - min) / (max + min)).clamp(0.0, 1.0))
}

pub(crate) fn is_valid_angle(theta: f64) -> bool {
    (0.0..=PI).contains(&theta)
}
