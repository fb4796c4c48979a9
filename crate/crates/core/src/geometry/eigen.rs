//! Cyclic Jacobi eigen-decomposition for small dense symmetric matrices.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in descending order with matching unit eigenvectors.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Column `k` (stored row-major, `vectors[i * dim + k]`) is the eigenvector of `values[k]`.
    pub vectors: Vec<f64>,
    pub dim: usize,
}

impl SymmetricEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.vectors[i * self.dim + k])
            .collect()
    }

    /// Coordinates of `x` in the eigenbasis, `Vᵀx`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|k| (0..d).map(|i| self.vectors[i * d + k] * x[i]).sum())
            .collect()
    }

    /// Maps eigenbasis coordinates back, `Vc`.
    pub fn reconstruct(&self, coeffs: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|i| (0..d).map(|k| self.vectors[i * d + k] * coeffs[k]).sum())
            .collect()
    }
}

/// Largest relative asymmetry `|a_ij - a_ji| / max|a|`.
pub(crate) fn asymmetry(dim: usize, a: &[f64]) -> f64 {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in (i + 1)..dim {
            worst = worst.max((a[i * dim + j] - a[j * dim + i]).abs() / scale);
        }
    }
    worst
}

/// Decomposes a row-major symmetric `dim × dim` matrix.
///
/// Each sweep visits every off-diagonal pair once and annihilates it with a
/// plane rotation; sweeps stop once the off-diagonal mass is at rounding level.
pub fn jacobi_eigen(dim: usize, matrix: &[f64]) -> Result<SymmetricEigen> {
    if dim == 0 || matrix.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            left: matrix.len(),
            right: dim * dim,
        });
    }
    if let Some(i) = matrix.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let asym = asymmetry(dim, matrix);
    if asym > 1e-12 {
        return Err(Error::NotSymmetric(asym));
    }

    let n = dim;
    // symmetrize so rounding-level asymmetry does not bias the rotations
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (matrix[i * n + j] + matrix[j * n + i]);
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-2 * frob || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&k| a[k * n + k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_k, &old_k) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + new_k] = v[i * n + old_k];
        }
    }
    Ok(SymmetricEigen {
        values,
        vectors,
        dim: n,
    })
}
