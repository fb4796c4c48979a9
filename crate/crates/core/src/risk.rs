//! Excess 0-1 risk estimators and the bounds that control them.
//!
//! Throughout, `f*(x) = E[Y | x] = 2p*(x) − 1` and `sign(0) = +1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angle_l2p, is_valid_angle, Matrix, Vector};
use crate::surrogate::{expected_phi_risk, LossKind};
use crate::synth::{apply_link, sample_features, Dataset, FeatureLaw, LinkFunction};

/// Multiplier of `(1 − cos θ)·E|f*|` in the rotation-invariant excess risk.
///
/// In the plane spanned by the two predictors the projected direction is
/// uniform, and the disagreement sectors lie next to the decision boundary of
/// `β*`, giving `(1/π)∫₀^θ sin t dt · ‖β*‖E‖X‖` with
/// `‖β*‖E‖X‖ = (π/2) E|<β*, X>|`. The Monte Carlo tests pin this at 1/2.
pub const ROTINV_PREFACTOR: f64 = 0.5;

pub const DEFAULT_EVAL_SIZE: usize = 100_000;

#[inline]
fn sign(x: f64) -> bool {
    x >= 0.0
}

/// Mean and standard error of the mean.
pub(crate) fn mean_and_se(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for v in values {
        n += 1;
        sum += v;
        sum_sq += v * v;
    }
    if n == 0 {
        return (0.0, 0.0);
    }
    let nf = n as f64;
    let mean = sum / nf;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

fn check_dims(beta: &Vector, d: usize) -> Result<()> {
    if beta.dim() != d {
        return Err(Error::DimensionMismatch {
            left: beta.dim(),
            right: d,
        });
    }
    Ok(())
}

/// `E[|f*| 1{sign f ≠ sign f*}]` on a fixed sample with known `p*`.
pub fn excess_01_on_sample(beta: &Vector, features: &Matrix, pstar: &[f64]) -> Result<(f64, f64)> {
    check_dims(beta, features.cols())?;
    let f = features.apply(beta.as_slice());
    Ok(mean_and_se(f.iter().zip(pstar).map(|(f, p)| {
        let fstar = 2.0 * p - 1.0;
        if sign(*f) != sign(fstar) {
            fstar.abs()
        } else {
            0.0
        }
    })))
}

fn pstar_for(features: &Matrix, beta_star: &Vector, link: LinkFunction) -> Result<Vec<f64>> {
    features
        .apply(beta_star.as_slice())
        .into_iter()
        .map(|z| apply_link(link, z))
        .collect()
}

/// Monte Carlo excess classification risk of `β` against `β*` on `n_eval`
/// fresh draws of the feature law.
pub fn excess_01_mc(
    beta: &Vector,
    beta_star: &Vector,
    law: &FeatureLaw,
    link: LinkFunction,
    n_eval: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_dims(beta_star, law.dim)?;
    let features = sample_features(law, n_eval, seed);
    let pstar = pstar_for(&features, beta_star, link)?;
    excess_01_on_sample(beta, &features, &pstar)
}

/// Monte Carlo `P(sign<β*, X> ≠ sign<β, X>)`.
pub fn disagreement_probability_mc(
    beta: &Vector,
    beta_star: &Vector,
    law: &FeatureLaw,
    n_eval: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_dims(beta, law.dim)?;
    check_dims(beta_star, law.dim)?;
    let features = sample_features(law, n_eval, seed);
    let f = features.apply(beta.as_slice());
    let g = features.apply(beta_star.as_slice());
    Ok(mean_and_se(f.iter().zip(&g).map(|(a, b)| {
        if sign(*a) != sign(*b) {
            1.0
        } else {
            0.0
        }
    })))
}

/// Exact excess risk for rotation-invariant features and linear `f*`:
/// `ROTINV_PREFACTOR · (1 − cos θ) · E|f*|`.
pub fn excess_01_exact_rotinv(theta: f64, e_abs_fstar: f64) -> Result<f64> {
    if !is_valid_angle(theta) {
        return Err(Error::Domain(format!("angle {theta} outside [0, pi]")));
    }
    Ok(ROTINV_PREFACTOR * (1.0 - theta.cos()) * e_abs_fstar)
}

fn fstar_of(data: &Dataset) -> Result<Vec<f64>> {
    data.fstar()
        .ok_or_else(|| Error::Domain("dataset has no true probabilities".into()))
}

/// `‖f*‖_{2,P̂} · inf_{t>0} ‖t f − f*/‖f*‖‖_{2,P̂}` on the sample.
///
/// Equals `‖f*‖ sin θ` whenever `<f, f*> > 0`; for obtuse or orthogonal pairs
/// the infimum over positive rescalings is attained at `t → 0` and the bound
/// is `‖f*‖`.
pub fn bound_sin(beta: &Vector, data: &Dataset) -> Result<f64> {
    check_dims(beta, data.dim())?;
    let fstar = fstar_of(data)?;
    let f = data.features.apply(beta.as_slice());
    let fstar_norm = l2(&fstar);
    if fstar_norm < crate::geometry::ZERO_NORM {
        return Err(Error::ZeroVector);
    }
    match angle_l2p(&f, &fstar) {
        Ok(a) => Ok(fstar_norm * a.rescaling_distance()),
        // f ≡ 0 on the sample: only t·0 is available
        Err(Error::ZeroVector) => Ok(fstar_norm),
        Err(e) => Err(e),
    }
}

/// `‖f − f*‖_{2,P̂}`.
pub fn bound_bartlett(beta: &Vector, data: &Dataset) -> Result<f64> {
    check_dims(beta, data.dim())?;
    let fstar = fstar_of(data)?;
    let f = data.features.apply(beta.as_slice());
    let diff: Vec<f64> = f.iter().zip(&fstar).map(|(a, b)| a - b).collect();
    Ok(l2(&diff))
}

fn l2(v: &[f64]) -> f64 {
    let n = v.len().max(1) as f64;
    (v.iter().map(|x| x * x).sum::<f64>() / n).sqrt()
}

/// α-noise exponent and constant (`c′` is supplied, never estimated).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginParams {
    pub alpha: f64,
    pub c_prime: f64,
}

impl MarginParams {
    pub fn new(alpha: f64, c_prime: f64) -> Result<Self> {
        let p = MarginParams { alpha, c_prime };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Domain(format!(
                "alpha {} outside [0, 1]",
                self.alpha
            )));
        }
        if !(self.c_prime > 0.0 && self.c_prime.is_finite()) {
            return Err(Error::Domain(format!(
                "c' must be positive, got {}",
                self.c_prime
            )));
        }
        Ok(())
    }
}

/// `‖f*‖^{1+α} (sin θ)^{1+α} / (4c′)`, with `sin θ = bound_sin_value / ‖f*‖`.
pub fn bound_margin(bound_sin_value: f64, fstar_norm: f64, params: &MarginParams) -> Result<f64> {
    params.validate()?;
    if !(fstar_norm > 0.0) || bound_sin_value < 0.0 {
        return Err(Error::Domain(
            "margin bound needs ||f*|| > 0 and bound_sin >= 0".into(),
        ));
    }
    let sine = bound_sin_value / fstar_norm;
    let e = 1.0 + params.alpha;
    Ok(fstar_norm.powf(e) * sine.powf(e) / (4.0 * params.c_prime))
}

/// Monte Carlo `P(|f*(X)| < ε)` for each ε, for inspecting the α-noise condition.
pub fn estimate_margin_mass(
    beta_star: &Vector,
    link: LinkFunction,
    law: &FeatureLaw,
    epsilons: &[f64],
    n_eval: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if epsilons.iter().any(|e| !(*e > 0.0)) || epsilons.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain(
            "epsilons must be positive and ascending".into(),
        ));
    }
    check_dims(beta_star, law.dim)?;
    let features = sample_features(law, n_eval, seed);
    let mut abs: Vec<f64> = pstar_for(&features, beta_star, link)?
        .iter()
        .map(|p| (2.0 * p - 1.0).abs())
        .collect();
    abs.sort_by(f64::total_cmp);
    let n = abs.len().max(1) as f64;
    Ok(epsilons
        .iter()
        .map(|&eps| (eps, abs.partition_point(|v| *v < eps) as f64 / n))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub excess_01: f64,
    pub excess_phi: f64,
    pub sine_theta: f64,
    pub fstar_norm: f64,
    pub bound_sin: f64,
    pub bound_bartlett: f64,
    pub bound_margin: Option<f64>,
    pub n_eval: usize,
    pub std_error_01: f64,
}

/// Evaluates every risk and bound for `β` on one held-out sample with known `p*`.
///
/// `phi_baseline` is the surrogate risk of the reference minimizer on the
/// same sample, so `excess_phi` is a paired difference.
pub fn evaluate(
    beta: &Vector,
    eval: &Dataset,
    loss: LossKind,
    phi_baseline: f64,
    margin: Option<&MarginParams>,
) -> Result<RiskReport> {
    let pstar = eval
        .true_probabilities
        .as_ref()
        .ok_or_else(|| Error::Domain("evaluation sample has no true probabilities".into()))?;
    let (excess_01, std_error_01) = excess_01_on_sample(beta, &eval.features, pstar)?;
    let fstar = fstar_of(eval)?;
    let fstar_norm = l2(&fstar);
    let f = eval.features.apply(beta.as_slice());
    let sine_theta = match angle_l2p(&f, &fstar) {
        Ok(a) => a.sine,
        Err(Error::ZeroVector) => 1.0,
        Err(e) => return Err(e),
    };
    let bs = bound_sin(beta, eval)?;
    let bb = bound_bartlett(beta, eval)?;
    let bm = margin
        .map(|m| bound_margin(bs, fstar_norm, m))
        .transpose()?;
    let phi = expected_phi_risk(beta, &eval.features, pstar, loss)?;
    Ok(RiskReport {
        excess_01,
        excess_phi: phi - phi_baseline,
        sine_theta,
        fstar_norm,
        bound_sin: bs,
        bound_bartlett: bb,
        bound_margin: bm,
        n_eval: eval.len(),
        std_error_01,
    })
}
