//! Surrogate losses and minimizers over the Euclidean ball `‖β‖ ≤ r`.
//!
//! Square loss is solved exactly through the KKT system
//! `(Σ̂ + λI)β = Xᵀy/n`, bisecting on the multiplier `λ`. Any loss can also
//! be fitted by projected gradient descent with step `1/L`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    estimate_covariance, norm, CovarianceMatrix, Matrix, SymmetricEigen, Vector,
};
use crate::synth::{sigmoid, Dataset};

const BISECTION_LIMIT: usize = 200;
/// Relative eigenvalue cutoff below which a direction is treated as null.
const PINV_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `(y − f)²`
    Square,
    /// `log(1 + e^{−yf})`
    Logistic,
}

/// `log(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Square => "square",
            LossKind::Logistic => "logistic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(LossKind::Square),
            "logistic" => Ok(LossKind::Logistic),
            other => Err(Error::InvalidConfig(format!("unknown loss `{other}`"))),
        }
    }

    pub fn value(self, y: f64, f: f64) -> f64 {
        match self {
            LossKind::Square => (y - f) * (y - f),
            LossKind::Logistic => softplus(-y * f),
        }
    }

    /// `∂φ(y, f)/∂f`.
    pub fn derivative(self, y: f64, f: f64) -> f64 {
        match self {
            LossKind::Square => 2.0 * (f - y),
            LossKind::Logistic => -y * sigmoid(-y * f),
        }
    }

    /// `E[φ(Y, f)]` when `P(Y = +1) = p`.
    pub fn expected_value(self, p: f64, f: f64) -> f64 {
        p * self.value(1.0, f) + (1.0 - p) * self.value(-1.0, f)
    }

    /// Upper bound on `φ''` in `f`.
    pub fn curvature(self) -> f64 {
        match self {
            LossKind::Square => 2.0,
            LossKind::Logistic => 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintBall {
    radius: f64,
}

impl ConstraintBall {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "radius must be positive, got {radius}"
            )));
        }
        Ok(ConstraintBall { radius })
    }

    pub fn unbounded() -> Self {
        ConstraintBall {
            radius: f64::INFINITY,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn is_bounded(&self) -> bool {
        self.radius.is_finite()
    }

    /// Radial projection onto the ball.
    pub fn project(&self, beta: &mut [f64]) {
        let n = norm(beta);
        if n > self.radius {
            let s = self.radius / n;
            beta.iter_mut().for_each(|b| *b *= s);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub beta_tilde: Vector,
    /// Square-loss KKT multiplier; `None` for the gradient solver.
    pub lagrange_multiplier: Option<f64>,
    pub active: bool,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub objective_value: f64,
    pub converged: bool,
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

/// `Σ̂ = XᵀX/n`, `b = Xᵀy/n` and `mean(y²)` for a least-squares problem.
#[derive(Debug, Clone)]
pub struct LeastSquaresStats {
    pub sigma: CovarianceMatrix,
    pub xty: Vec<f64>,
    pub mean_y2: f64,
}

impl LeastSquaresStats {
    pub fn from_targets(features: &Matrix, targets: &[f64]) -> Self {
        let n = targets.len().max(1) as f64;
        LeastSquaresStats {
            sigma: estimate_covariance(features),
            xty: features.mean_weighted_rows(targets),
            mean_y2: targets.iter().map(|y| y * y).sum::<f64>() / n,
        }
    }

    pub fn from_dataset(data: &Dataset) -> Self {
        LeastSquaresStats::from_targets(&data.features, &data.labels_f64())
    }

    /// `mean(y²) − 2βᵀb + βᵀΣ̂β`.
    pub fn objective(&self, beta: &[f64]) -> f64 {
        let bt: f64 = beta.iter().zip(&self.xty).map(|(a, b)| a * b).sum();
        self.mean_y2 - 2.0 * bt + self.sigma.quad_form(beta)
    }

    /// `2(Σ̂β − b)`.
    pub fn gradient(&self, beta: &[f64]) -> Vec<f64> {
        self.sigma
            .mul_vec(beta)
            .iter()
            .zip(&self.xty)
            .map(|(s, b)| 2.0 * (s - b))
            .collect()
    }
}

struct Ridge<'a> {
    eig: &'a SymmetricEigen,
    coeffs: Vec<f64>,
    cutoff: f64,
}

impl Ridge<'_> {
    fn denominator(&self, k: usize, lambda: f64) -> Option<f64> {
        let s = self.eig.values[k];
        if lambda == 0.0 {
            (s > self.cutoff).then_some(s)
        } else {
            Some(s.max(0.0) + lambda)
        }
    }

    fn norm(&self, lambda: f64) -> f64 {
        (0..self.coeffs.len())
            .filter_map(|k| {
                self.denominator(k, lambda)
                    .map(|den| (self.coeffs[k] / den).powi(2))
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `Σ c²/(s+λ)³`, i.e. `−‖β‖·d‖β‖/dλ`.
    fn norm_slope(&self, lambda: f64) -> f64 {
        (0..self.coeffs.len())
            .filter_map(|k| {
                self.denominator(k, lambda)
                    .map(|den| self.coeffs[k].powi(2) / den.powi(3))
            })
            .sum()
    }

    fn beta(&self, lambda: f64) -> Vec<f64> {
        let c: Vec<f64> = (0..self.coeffs.len())
            .map(|k| {
                self.denominator(k, lambda)
                    .map_or(0.0, |den| self.coeffs[k] / den)
            })
            .collect();
        self.eig.reconstruct(&c)
    }
}

/// Exact minimizer of `(1/n)Σ(yᵢ − <β, xᵢ>)²` over the ball.
pub fn fit_constrained_least_squares(data: &Dataset, ball: &ConstraintBall) -> Result<FitResult> {
    fit_constrained_least_squares_stats(&LeastSquaresStats::from_dataset(data), ball)
}

/// Same as [`fit_constrained_least_squares`], from sufficient statistics.
pub fn fit_constrained_least_squares_stats(
    stats: &LeastSquaresStats,
    ball: &ConstraintBall,
) -> Result<FitResult> {
    let eig = stats.sigma.eigen();
    let smax = eig.values[0];
    if !(smax > 0.0) {
        return Err(Error::DegenerateDesign);
    }
    let ridge = Ridge {
        eig: &eig,
        coeffs: eig.project(&stats.xty),
        cutoff: PINV_CUTOFF * smax,
    };
    let r = ball.radius();

    let finish =
        |beta: Vec<f64>, lambda: f64, active: bool, iterations: usize| -> Result<FitResult> {
            let objective_value = stats.objective(&beta);
            let final_gradient_norm = norm(&stats.gradient(&beta));
            Ok(FitResult {
                beta_tilde: Vector::new(beta)?,
                lagrange_multiplier: Some(lambda),
                active,
                iterations,
                final_gradient_norm,
                objective_value,
                converged: true,
                objective_trace: vec![objective_value],
            })
        };

    if ridge.norm(0.0) <= r {
        return finish(ridge.beta(0.0), 0.0, false, 0);
    }

    let mut iterations = 0;
    let mut lo = 0.0;
    let mut hi = smax;
    while ridge.norm(hi) >= r {
        lo = hi;
        hi *= 2.0;
        iterations += 1;
        if iterations > BISECTION_LIMIT {
            return Err(Error::NoConvergence(iterations));
        }
    }
    let mut bisections = 0;
    while hi - lo >= 1e-12 * (1.0 + 0.5 * (lo + hi)) {
        let mid = 0.5 * (lo + hi);
        if ridge.norm(mid) > r {
            lo = mid;
        } else {
            hi = mid;
        }
        bisections += 1;
        if bisections > BISECTION_LIMIT {
            return Err(Error::NoConvergence(iterations + bisections));
        }
    }
    iterations += bisections;

    // Newton on 1/‖β(λ)‖ − 1/r, kept inside the bracket
    let mut lambda = 0.5 * (lo + hi);
    for _ in 0..8 {
        let nb = ridge.norm(lambda);
        let step = (1.0 / nb - 1.0 / r) / (ridge.norm_slope(lambda) / nb.powi(3));
        let next = lambda - step;
        if !(next >= lo && next <= hi) || step == 0.0 {
            break;
        }
        lambda = next;
        iterations += 1;
    }
    finish(ridge.beta(lambda), lambda, true, iterations)
}

fn logistic_objective_and_gradient(
    features: &Matrix,
    labels: &[f64],
    beta: &[f64],
) -> (f64, Vec<f64>) {
    let n = labels.len().max(1) as f64;
    let mut obj = 0.0;
    let mut grad = vec![0.0; beta.len()];
    for (x, &y) in features.iter_rows().zip(labels) {
        let m = y * x.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>();
        obj += softplus(-m);
        let w = -y * sigmoid(-m);
        for (g, xi) in grad.iter_mut().zip(x) {
            *g += w * xi;
        }
    }
    grad.iter_mut().for_each(|g| *g /= n);
    (obj / n, grad)
}

/// Projected gradient descent `β ← Π_r(β − ∇R̂(β)/L)` from `β₀ = 0`, with
/// `L = σ_max(Σ̂)·sup φ''`.
///
/// Stops once `‖β_{k+1} − β_k‖ ≤ tolerance·max(1, ‖β_k‖)`. Hitting
/// `max_iters` first is reported through `converged = false`, not an error.
pub fn fit_projected_gradient(
    data: &Dataset,
    loss: LossKind,
    ball: &ConstraintBall,
    max_iters: usize,
    tolerance: f64,
) -> Result<FitResult> {
    if max_iters == 0 || !(tolerance > 0.0) {
        return Err(Error::InvalidConfig(
            "projected gradient needs max_iters >= 1 and tolerance > 0".into(),
        ));
    }
    let labels = data.labels_f64();
    let stats = LeastSquaresStats::from_targets(&data.features, &labels);
    let smax = stats.sigma.eigen().values[0];
    if !(smax > 0.0) {
        return Err(Error::DegenerateDesign);
    }
    let step = 1.0 / (smax * loss.curvature());

    let eval = |beta: &[f64]| -> (f64, Vec<f64>) {
        match loss {
            LossKind::Square => (stats.objective(beta), stats.gradient(beta)),
            LossKind::Logistic => logistic_objective_and_gradient(&data.features, &labels, beta),
        }
    };

    let d = data.dim();
    let mut beta = vec![0.0; d];
    let (mut obj, mut grad) = eval(&beta);
    let mut trace = vec![obj];
    let mut converged = false;
    let mut iterations = 0;
    let mut mapping_norm = f64::INFINITY;
    while iterations < max_iters {
        let mut next: Vec<f64> = beta.iter().zip(&grad).map(|(b, g)| b - step * g).collect();
        ball.project(&mut next);
        let moved = norm(
            &next
                .iter()
                .zip(&beta)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        );
        let scale = norm(&beta).max(1.0);
        mapping_norm = moved / step;
        beta = next;
        (obj, grad) = eval(&beta);
        trace.push(obj);
        iterations += 1;
        if moved <= tolerance * scale {
            converged = true;
            break;
        }
    }
    let active = ball.is_bounded() && norm(&beta) >= ball.radius() * (1.0 - 1e-9);
    Ok(FitResult {
        beta_tilde: Vector::new(beta)?,
        lagrange_multiplier: None,
        active,
        iterations,
        final_gradient_norm: mapping_norm,
        objective_value: obj,
        converged,
        objective_trace: trace,
    })
}

/// `(1/n) Σ φ(yᵢ, <β, xᵢ>)`.
pub fn empirical_phi_risk(beta: &Vector, data: &Dataset, loss: LossKind) -> Result<f64> {
    check_dim(beta, data.features.cols())?;
    let f = data.features.apply(beta.as_slice());
    let n = data.len().max(1) as f64;
    Ok(f.iter()
        .zip(&data.labels)
        .map(|(f, &y)| loss.value(y as f64, *f))
        .sum::<f64>()
        / n)
}

/// `(1/n) Σ E[φ(Y, <β, xᵢ>) | xᵢ]`, integrating the label out with `p*`.
pub fn expected_phi_risk(
    beta: &Vector,
    features: &Matrix,
    pstar: &[f64],
    loss: LossKind,
) -> Result<f64> {
    check_dim(beta, features.cols())?;
    let f = features.apply(beta.as_slice());
    let n = pstar.len().max(1) as f64;
    Ok(f.iter()
        .zip(pstar)
        .map(|(f, p)| loss.expected_value(*p, *f))
        .sum::<f64>()
        / n)
}

fn check_dim(beta: &Vector, d: usize) -> Result<()> {
    if beta.dim() != d {
        return Err(Error::DimensionMismatch {
            left: beta.dim(),
            right: d,
        });
    }
    Ok(())
}

/// Unconstrained minimizer of the label-integrated risk over linear predictors.
///
/// Square loss reduces to least squares against `f* = 2p* − 1`; logistic
/// loss is solved by damped Newton iterations.
pub fn population_minimizer(features: &Matrix, pstar: &[f64], loss: LossKind) -> Result<Vector> {
    match loss {
        LossKind::Square => {
            let fstar: Vec<f64> = pstar.iter().map(|p| 2.0 * p - 1.0).collect();
            let stats = LeastSquaresStats::from_targets(features, &fstar);
            Ok(
                fit_constrained_least_squares_stats(&stats, &ConstraintBall::unbounded())?
                    .beta_tilde,
            )
        }
        LossKind::Logistic => logistic_newton(features, pstar),
    }
}

fn logistic_newton(features: &Matrix, pstar: &[f64]) -> Result<Vector> {
    let d = features.cols();
    let n = pstar.len().max(1) as f64;
    let risk = |beta: &[f64]| -> f64 {
        features
            .iter_rows()
            .zip(pstar)
            .map(|(x, p)| {
                LossKind::Logistic.expected_value(*p, x.iter().zip(beta).map(|(a, b)| a * b).sum())
            })
            .sum::<f64>()
            / n
    };
    let mut beta = vec![0.0; d];
    let mut current = risk(&beta);
    const MAX_NEWTON: usize = 100;
    for _ in 0..MAX_NEWTON {
        let mut grad = vec![0.0; d];
        let mut hess = vec![0.0; d * d];
        for (x, p) in features.iter_rows().zip(pstar) {
            let z: f64 = x.iter().zip(&beta).map(|(a, b)| a * b).sum();
            let s = sigmoid(z);
            let w = s * (1.0 - s);
            for i in 0..d {
                grad[i] += (s - p) * x[i];
                for j in i..d {
                    hess[i * d + j] += w * x[i] * x[j];
                }
            }
        }
        for i in 0..d {
            grad[i] /= n;
            for j in i..d {
                let v = hess[i * d + j] / n;
                hess[i * d + j] = v;
                hess[j * d + i] = v;
            }
        }
        let eig = crate::geometry::jacobi_eigen(d, &hess)?;
        let top = eig.values[0];
        if !(top > 0.0) {
            return Err(Error::DegenerateDesign);
        }
        let g = eig.project(&grad);
        let delta = eig.reconstruct(
            &g.iter()
                .zip(&eig.values)
                .map(|(g, s)| if *s > PINV_CUTOFF * top { g / s } else { 0.0 })
                .collect::<Vec<_>>(),
        );
        // Newton decrement small enough: done
        let decrement: f64 = delta.iter().zip(&grad).map(|(a, b)| a * b).sum();
        if decrement <= 1e-24 {
            break;
        }
        // inside the quadratic region the risk change is below its rounding
        // noise, so the full step is taken without a line search
        if decrement <= 1e-10 {
            beta.iter_mut().zip(&delta).for_each(|(b, s)| *b -= s);
            current = risk(&beta);
            continue;
        }
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = beta.iter().zip(&delta).map(|(b, s)| b - t * s).collect();
            let r = risk(&trial);
            if r <= current - 0.25 * t * decrement {
                beta = trial;
                current = r;
                break;
            }
            t *= 0.5;
            if t < 1e-10 {
                return Vector::new(beta);
            }
        }
    }
    Vector::new(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, FeatureLaw, LinkFunction};

    fn stats(sigma: &[f64], d: usize, beta_hat: &[f64]) -> LeastSquaresStats {
        let sigma = CovarianceMatrix::new(d, sigma.to_vec()).unwrap();
        let xty = sigma.mul_vec(beta_hat);
        LeastSquaresStats {
            sigma,
            xty,
            mean_y2: 1.0,
        }
    }

    #[test]
    fn unbounded_returns_ols() {
        let s = stats(&[2.0, 0.3, 0.3, 1.0], 2, &[0.7, -1.1]);
        let fit = fit_constrained_least_squares_stats(&s, &ConstraintBall::unbounded()).unwrap();
        assert!(!fit.active);
        assert_eq!(fit.lagrange_multiplier, Some(0.0));
        assert!((fit.beta_tilde.as_slice()[0] - 0.7).abs() < 1e-13);
        assert!((fit.beta_tilde.as_slice()[1] + 1.1).abs() < 1e-13);
    }

    #[test]
    fn isotropic_shrinks_along_direction() {
        let s = stats(&[1.0, 0.0, 0.0, 1.0], 2, &[3.0, 4.0]);
        let fit =
            fit_constrained_least_squares_stats(&s, &ConstraintBall::new(1.0).unwrap()).unwrap();
        assert!(fit.active);
        let b = fit.beta_tilde.as_slice();
        assert!((b[0] - 0.6).abs() < 1e-12 && (b[1] - 0.8).abs() < 1e-12);
        assert!((fit.lagrange_multiplier.unwrap() - 4.0).abs() < 1e-9);
    }

    /// Dense grid over the disk, then coordinate refinement around the best cell.
    fn disk_grid_minimizer(s: &LeastSquaresStats, r: f64) -> [f64; 2] {
        let h = 1e-4;
        let m = (r / h).ceil() as i64;
        let mut best = ([0.0, 0.0], f64::INFINITY);
        for i in -m..=m {
            for j in -m..=m {
                let b = [i as f64 * h, j as f64 * h];
                if b[0] * b[0] + b[1] * b[1] <= r * r {
                    let o = s.objective(&b);
                    if o < best.1 {
                        best = (b, o);
                    }
                }
            }
        }
        // the constrained optimum lies on the circle here; refine the polar angle
        let phi0 = best.0[1].atan2(best.0[0]);
        let (mut a, mut c) = (phi0 - 1e-3, phi0 + 1e-3);
        let f = |phi: f64| s.objective(&[r * phi.cos(), r * phi.sin()]);
        for _ in 0..200 {
            let m1 = a + (c - a) / 3.0;
            let m2 = c - (c - a) / 3.0;
            if f(m1) < f(m2) {
                c = m2;
            } else {
                a = m1;
            }
        }
        let phi = 0.5 * (a + c);
        [r * phi.cos(), r * phi.sin()]
    }

    #[test]
    fn anisotropic_bisection_matches_grid() {
        let s = stats(&[4.0, 0.0, 0.0, 1.0], 2, &[1.0, 1.0]);
        let fit =
            fit_constrained_least_squares_stats(&s, &ConstraintBall::new(0.5).unwrap()).unwrap();
        let oracle = disk_grid_minimizer(&s, 0.5);
        let b = fit.beta_tilde.as_slice();
        assert!((b[0] - oracle[0]).abs() < 1e-8, "{b:?} vs {oracle:?}");
        assert!((b[1] - oracle[1]).abs() < 1e-8, "{b:?} vs {oracle:?}");
        assert!((fit.beta_tilde.norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn singular_design_min_norm() {
        // x always on the first axis
        let x = Matrix::from_rows(2, 2, vec![1.0, 0.0, -1.0, 0.0]).unwrap();
        let data = Dataset::new(x, vec![1, -1], None).unwrap();
        let fit = fit_constrained_least_squares(&data, &ConstraintBall::unbounded()).unwrap();
        assert_eq!(fit.beta_tilde.as_slice(), &[1.0, 0.0]);
        let zero = Dataset::new(
            Matrix::from_rows(1, 2, vec![0.0, 0.0]).unwrap(),
            vec![1],
            None,
        )
        .unwrap();
        assert_eq!(
            fit_constrained_least_squares(&zero, &ConstraintBall::unbounded()),
            Err(Error::DegenerateDesign)
        );
    }

    #[test]
    fn phi_risk_at_zero() {
        let data = generate(
            &FeatureLaw::gaussian_iid(3, 1.0),
            LinkFunction::Logistic,
            &[1.0, 0.0, 2.0].into(),
            500,
            4,
        )
        .unwrap();
        let zero = Vector::zeros(3);
        assert_eq!(
            empirical_phi_risk(&zero, &data, LossKind::Square).unwrap(),
            1.0
        );
        assert!(
            (empirical_phi_risk(&zero, &data, LossKind::Logistic).unwrap() - 2f64.ln()).abs()
                < 1e-12
        );
    }

    #[test]
    fn perfect_fit_has_zero_square_risk() {
        let x = Matrix::from_rows(2, 1, vec![1.0, -1.0]).unwrap();
        let data = Dataset::new(x, vec![1, -1], None).unwrap();
        assert_eq!(
            empirical_phi_risk(&Vector::from([1.0]), &data, LossKind::Square).unwrap(),
            0.0
        );
    }

    #[test]
    fn logistic_separable_hits_boundary() {
        let x = Matrix::from_rows(4, 2, vec![1.0, 0.2, 2.0, -0.5, -1.0, 0.3, -1.5, -0.1]).unwrap();
        let data = Dataset::new(x, vec![1, 1, -1, -1], None).unwrap();
        let fit = fit_projected_gradient(
            &data,
            LossKind::Logistic,
            &ConstraintBall::new(1.0).unwrap(),
            100_000,
            1e-12,
        )
        .unwrap();
        assert!((fit.beta_tilde.norm() - 1.0).abs() < 1e-12);
        assert!(fit.active);
        assert!(fit.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn gradient_matches_closed_form_unbounded() {
        let data = generate(
            &FeatureLaw::gaussian_iid(3, 1.0),
            LinkFunction::Logistic,
            &[1.0, -2.0, 0.5].into(),
            400,
            17,
        )
        .unwrap();
        let exact = fit_constrained_least_squares(&data, &ConstraintBall::unbounded()).unwrap();
        let pgd = fit_projected_gradient(
            &data,
            LossKind::Square,
            &ConstraintBall::unbounded(),
            100_000,
            1e-14,
        )
        .unwrap();
        assert!(pgd.converged);
        let diff = exact.beta_tilde.sub(&pgd.beta_tilde).norm();
        assert!(diff < 1e-6, "{diff}");
    }

    #[test]
    fn rejects_bad_solver_parameters() {
        let data = generate(
            &FeatureLaw::gaussian_iid(2, 1.0),
            LinkFunction::Logistic,
            &[1.0, 0.0].into(),
            10,
            1,
        )
        .unwrap();
        assert!(fit_projected_gradient(
            &data,
            LossKind::Square,
            &ConstraintBall::unbounded(),
            0,
            1e-6
        )
        .is_err());
        assert!(ConstraintBall::new(0.0).is_err());
        assert!(ConstraintBall::new(f64::NAN).is_err());
    }

    #[test]
    fn logistic_population_minimizer_recovers_beta_star() {
        let beta = Vector::from([1.0, -3.0]);
        let data = generate(
            &FeatureLaw::uniform_iid(2, 1.0),
            LinkFunction::Logistic,
            &beta,
            20_000,
            2,
        )
        .unwrap();
        let est = population_minimizer(
            &data.features,
            data.true_probabilities.as_ref().unwrap(),
            LossKind::Logistic,
        )
        .unwrap();
        assert!(est.sub(&beta).norm() < 1e-8, "{est:?}");
    }
}
