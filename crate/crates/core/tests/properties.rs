//! Randomized invariants for angles, eigenvalues, solvers and bounds.

use std::f64::consts::PI;

use dirrec::geometry::{
    angle_euclidean, calibration_bound, eigenvalues_symmetric, jacobi_eigen, CovarianceMatrix,
};
use dirrec::risk::{bound_bartlett, bound_sin, excess_01_mc, excess_01_on_sample};
use dirrec::surrogate::{
    fit_constrained_least_squares, fit_projected_gradient, ConstraintBall, LeastSquaresStats,
    LossKind,
};
use dirrec::synth::{generate, FeatureLaw, LinkFunction};
use dirrec::Vector;
use proptest::prelude::*;

fn nonzero_vec(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, dim)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-6)
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=8).prop_flat_map(|d| (nonzero_vec(d), nonzero_vec(d)))
}

fn vnorm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Minimum of a convex function on `[lo, hi]`: coarse grid, then ternary refinement.
fn convex_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let steps = 2000;
    let h = (hi - lo) / steps as f64;
    let best = (0..=steps)
        .map(|i| lo + i as f64 * h)
        .min_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap();
    let (mut a, mut b) = ((best - h).max(lo), (best + h).min(hi));
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) < f(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    f(0.5 * (a + b)).min(f(best))
}

/// `Σ = A Aᵀ / k` with `k` columns, so `k < d` gives a singular matrix.
fn random_psd(d: usize, k: usize, entries: &[f64]) -> CovarianceMatrix {
    let mut s = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            s[i * d + j] = (0..k)
                .map(|c| entries[i * k + c] * entries[j * k + c])
                .sum::<f64>()
                / k as f64;
        }
    }
    for i in 0..d {
        for j in 0..i {
            let avg = 0.5 * (s[i * d + j] + s[j * d + i]);
            s[i * d + j] = avg;
            s[j * d + i] = avg;
        }
    }
    CovarianceMatrix::new(d, s).unwrap()
}

fn psd_strategy() -> impl Strategy<Value = CovarianceMatrix> {
    (1usize..=8, 1usize..=12).prop_flat_map(|(d, k)| {
        prop::collection::vec(-3.0f64..3.0, d * k).prop_map(move |e| random_psd(d, k, &e))
    })
}

fn regression_instance() -> impl Strategy<Value = (usize, f64, Vec<f64>, u64)> {
    (2usize..=8).prop_flat_map(|d| (Just(d), 0.0f64..0.85, nonzero_vec(d), any::<u64>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn angle_rescaling_invariance((u, v) in pair(), c in 1e-3f64..1e3) {
        let (u, v) = (Vector::new(u).unwrap(), Vector::new(v).unwrap());
        let a = angle_euclidean(&u, &v).unwrap().angle_rad;
        let b = angle_euclidean(&u.scaled(c), &v).unwrap().angle_rad;
        prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }

    #[test]
    fn angle_reflection((u, v) in pair()) {
        let (u, v) = (Vector::new(u).unwrap(), Vector::new(v).unwrap());
        let a = angle_euclidean(&u, &v).unwrap().angle_rad;
        let b = angle_euclidean(&u.neg(), &v).unwrap().angle_rad;
        prop_assert!((a + b - PI).abs() <= 1e-12, "{a} + {b}");
    }

    #[test]
    fn sine_matches_rescaling_infimum((u, v) in pair()) {
        let uv: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        prop_assume!(uv.abs() > 1e-9);
        // reflect obtuse pairs onto the acute branch
        let v: Vec<f64> = if uv > 0.0 { v } else { v.iter().map(|x| -x).collect() };
        let nu = vnorm(&u);
        let nv = vnorm(&v);
        let dist = |t: f64| {
            u.iter().zip(&v).map(|(a, b)| (t * a - b / nv).powi(2)).sum::<f64>().sqrt()
        };
        // the minimizing t lies in [0, 1/‖u‖]
        let oracle = convex_min(dist, 0.0, 1.0 / nu);
        let r = angle_euclidean(&Vector::new(u.clone()).unwrap(), &Vector::new(v.clone()).unwrap()).unwrap();
        prop_assert!((r.sine - oracle).abs() <= 1e-6, "{} vs {oracle}", r.sine);
        prop_assert!((r.sine - r.angle_rad.sin()).abs() <= 1e-12);
        prop_assert!((r.cosine - r.angle_rad.cos()).abs() <= 1e-12);
    }

    #[test]
    fn calibration_bound_matches_grid(sigma in psd_strategy()) {
        let d = sigma.dim();
        let trace: f64 = (0..d).map(|i| sigma.get(i, i)).sum();
        prop_assume!(trace > 1e-9);
        let op_norm = |a: f64| {
            let mut m: Vec<f64> = sigma.as_slice().iter().map(|x| a * x).collect();
            for i in 0..d {
                m[i * d + i] -= 1.0;
            }
            jacobi_eigen(d, &m).unwrap().values.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
        };
        // σ_max ≥ trace/d, so the minimizer 2/(σ_max+σ_min) is below 2d/trace
        let oracle = convex_min(op_norm, 0.0, 2.0 * d as f64 / trace);
        let closed = calibration_bound(&sigma).unwrap();
        prop_assert!((closed - oracle).abs() <= 1e-6, "{closed} vs {oracle}");
        prop_assert!((0.0..=1.0).contains(&closed));
    }

    #[test]
    fn eigenvalues_scale_linearly(sigma in psd_strategy(), a in 1e-2f64..1e2) {
        let base = eigenvalues_symmetric(&sigma).unwrap();
        let scaled = eigenvalues_symmetric(&sigma.scaled(a)).unwrap();
        let top = base[0].abs().max(1e-300);
        for (x, y) in base.iter().zip(&scaled) {
            prop_assert!((a * x - y).abs() <= 1e-10 * a * top, "{x} {y}");
        }
        prop_assert!(base.windows(2).all(|w| w[0] >= w[1]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn kkt_and_solver_agreement((d, rho, beta, seed) in regression_instance(), frac in 0.05f64..0.95) {
        let law = FeatureLaw::correlated_gaussian(d, 1.0, rho);
        let data = generate(&law, LinkFunction::Logistic, &Vector::new(beta).unwrap(), 500, seed).unwrap();
        let stats = LeastSquaresStats::from_dataset(&data);
        let ols = fit_constrained_least_squares(&data, &ConstraintBall::unbounded()).unwrap();
        let r = frac * ols.beta_tilde.norm();
        let ball = ConstraintBall::new(r).unwrap();
        let fit = fit_constrained_least_squares(&data, &ball).unwrap();
        prop_assert!(fit.active);
        let lambda = fit.lagrange_multiplier.unwrap();
        prop_assert!(lambda > 0.0);
        let b = fit.beta_tilde.as_slice();
        let s_b = stats.sigma.mul_vec(b);
        let resid: Vec<f64> = (0..d).map(|k| s_b[k] + lambda * b[k] - stats.xty[k]).collect();
        prop_assert!(vnorm(&resid) <= 1e-8 * vnorm(&stats.xty), "kkt residual {}", vnorm(&resid));
        prop_assert!((fit.beta_tilde.norm() - r).abs() <= 1e-9 * r);

        let pgd = fit_projected_gradient(&data, LossKind::Square, &ball, 1_000_000, 1e-14).unwrap();
        let gap = vnorm(&fit.beta_tilde.sub(&pgd.beta_tilde).into_inner());
        prop_assert!(gap <= 1e-6, "solver gap {gap}");
        prop_assert!((fit.objective_value - pgd.objective_value).abs() <= 1e-10, "objective gap");
        prop_assert!(pgd.beta_tilde.norm() <= r * (1.0 + 1e-9));
    }

    #[test]
    fn projected_gradient_objective_monotone(
        (d, rho, beta, seed) in regression_instance(),
        radius in 0.05f64..5.0,
        logistic in any::<bool>(),
    ) {
        let law = FeatureLaw::correlated_gaussian(d, 1.0, rho);
        let data = generate(&law, LinkFunction::Logistic, &Vector::new(beta).unwrap(), 300, seed).unwrap();
        let loss = if logistic { LossKind::Logistic } else { LossKind::Square };
        let fit = fit_projected_gradient(&data, loss, &ConstraintBall::new(radius).unwrap(), 5000, 1e-10).unwrap();
        prop_assert!(!fit.objective_trace.is_empty());
        for w in fit.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn generation_is_deterministic((d, rho, beta, seed) in regression_instance()) {
        let law = FeatureLaw::correlated_gaussian(d, 1.0, rho);
        let beta = Vector::new(beta).unwrap();
        let a = generate(&law, LinkFunction::Logistic, &beta, 200, seed).unwrap();
        let b = generate(&law, LinkFunction::Logistic, &beta, 200, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn excess_01_is_scale_invariant((d, rho, beta, seed) in regression_instance(), c in 1e-3f64..1e3) {
        let law = FeatureLaw::correlated_gaussian(d, 1.0, rho);
        let star = Vector::new(beta).unwrap();
        let guess = Vector::new((0..d).map(|k| (k as f64 + 1.0).sin()).collect()).unwrap();
        let a = excess_01_mc(&guess, &star, &law, LinkFunction::Logistic, 5000, seed).unwrap();
        let b = excess_01_mc(&guess.scaled(c), &star, &law, LinkFunction::Logistic, 5000, seed).unwrap();
        prop_assert_eq!(a.0.to_bits(), b.0.to_bits());
        prop_assert_eq!(a.1.to_bits(), b.1.to_bits());
    }

    #[test]
    fn bounds_dominate_and_order((d, rho, star, seed) in regression_instance(), guess in nonzero_vec(8)) {
        let law = FeatureLaw::correlated_gaussian(d, 1.0, rho);
        let eval = generate(&law, LinkFunction::Logistic, &Vector::new(star).unwrap(), 5000, seed).unwrap();
        let beta = Vector::new(guess[..d].to_vec()).unwrap_or_else(|_| Vector::zeros(d));
        let bs = bound_sin(&beta, &eval).unwrap();
        let bb = bound_bartlett(&beta, &eval).unwrap();
        prop_assert!(bs <= bb + 1e-12, "{bs} > {bb}");
        let (excess, se) = excess_01_on_sample(&beta, &eval.features, eval.true_probabilities.as_ref().unwrap()).unwrap();
        prop_assert!(excess <= bs + 3.0 * se, "{excess} > {bs}");
    }
}

#[test]
fn bartlett_equals_sin_bound_at_optimal_rescaling() {
    let law = FeatureLaw::gaussian_iid(3, 1.0);
    let star = Vector::from([1.0, -0.5, 2.0]);
    let eval = generate(&law, LinkFunction::Logistic, &star, 20_000, 8).unwrap();
    let dir = Vector::from([0.8, -0.1, 1.9]);
    let bs = bound_sin(&dir, &eval).unwrap();
    let bartlett = |c: f64| bound_bartlett(&dir.scaled(c), &eval).unwrap();
    let best = convex_min(bartlett, 1e-6, 2.0);
    assert!((best - bs).abs() <= 1e-8, "{best} vs {bs}");
    for c in [0.05, 0.2, 1.0, 1.7] {
        assert!(bartlett(c) >= bs - 1e-12);
    }
}
