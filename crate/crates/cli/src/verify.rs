//! Randomized property suites behind `dirrec verify`.
//!
//! Every property evaluates a slack for one random instance: non-negative
//! means the property held, and the most negative slack over all trials is
//! reported. Trial `t` of a run with seed `s` uses instance seed
//! `split_seed(s, t)`, and `split_seed(x, 0) = x`, so a failing instance is
//! reproduced with `--property <suite>.<name> --trials 1 --seed <instance seed>`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};
use std::fmt;
use std::str::FromStr;

use dirrec::geometry::{
    angle_euclidean, calibration_bound, eigenvalues_symmetric, estimate_covariance, jacobi_eigen,
};
use dirrec::risk::{
    bound_bartlett, bound_margin, bound_sin, disagreement_probability_mc, excess_01_exact_rotinv,
    excess_01_mc, MarginParams,
};
use dirrec::surrogate::{fit_constrained_least_squares, fit_projected_gradient, LeastSquaresStats};
use dirrec::synth::{generate, sample_features, split_seed};
use dirrec::{
    ConstraintBall, CovarianceMatrix, FeatureKind, FeatureLaw, LinkFunction, LossKind, Matrix,
    Vector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Geometry,
    Bounds,
    Rotinv,
    Solvers,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::Bounds => "bounds",
            Suite::Rotinv => "rotinv",
            Suite::Solvers => "solvers",
            Suite::All => "all",
        }
    }

    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

impl FromStr for Suite {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "geometry" => Ok(Suite::Geometry),
            "bounds" => Ok(Suite::Bounds),
            "rotinv" => Ok(Suite::Rotinv),
            "solvers" => Ok(Suite::Solvers),
            "all" => Ok(Suite::All),
            other => Err(CliError::Validation(format!(
                "unknown suite `{other}` (expected geometry, bounds, rotinv, solvers or all)"
            ))),
        }
    }
}

/// Outcome of one instance.
struct Check {
    slack: f64,
    instance: String,
}

impl Check {
    fn new(slack: f64, instance: impl Into<String>) -> Self {
        Check {
            slack: if slack.is_nan() {
                f64::NEG_INFINITY
            } else {
                slack
            },
            instance: instance.into(),
        }
    }

    fn failed(err: impl fmt::Display, instance: impl Into<String>) -> Self {
        Check {
            slack: f64::NEG_INFINITY,
            instance: format!("{} (error: {err})", instance.into()),
        }
    }
}

pub struct Property {
    pub suite: Suite,
    pub name: &'static str,
    /// Properties over a fixed grid ignore `--trials` and run once.
    pub fixed: bool,
    run: fn(u64) -> Check,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub seed: u64,
    pub slack: f64,
    pub instance: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyOutcome {
    pub suite: Suite,
    pub name: &'static str,
    pub trials: usize,
    pub worst_slack: f64,
    pub violations: usize,
    /// The lowest-index failing trial.
    pub first_violation: Option<Violation>,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl fmt::Display for PropertyOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}.{} trials={} worst_slack={:.3e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite.name(),
            self.name,
            self.trials,
            self.worst_slack
        )?;
        if let Some(v) = &self.first_violation {
            write!(
                f,
                " violations={}\n  reproduce: dirrec verify --property {}.{} --trials 1 --seed {}\n  instance: {}",
                self.violations,
                self.suite.name(),
                self.name,
                v.seed,
                v.instance
            )?;
        }
        Ok(())
    }
}

pub fn properties() -> Vec<Property> {
    let p = |suite, name, fixed, run| Property {
        suite,
        name,
        fixed,
        run,
    };
    vec![
        p(
            Suite::Geometry,
            "angle_rescaling_invariance",
            false,
            angle_rescaling,
        ),
        p(Suite::Geometry, "angle_reflection", false, angle_reflection),
        p(
            Suite::Geometry,
            "sine_rescaling_infimum",
            false,
            sine_infimum,
        ),
        p(
            Suite::Geometry,
            "calibration_bound_grid",
            false,
            calibration_grid,
        ),
        p(Suite::Geometry, "eigenvalue_scaling", false, eigen_scaling),
        p(Suite::Bounds, "bound_validity", false, bound_validity),
        p(Suite::Bounds, "bound_ordering", false, bound_ordering),
        p(
            Suite::Bounds,
            "margin_bound_reduction",
            false,
            margin_reduction,
        ),
        p(
            Suite::Rotinv,
            "disagreement_angle_over_pi",
            false,
            disagreement_eq,
        ),
        p(
            Suite::Rotinv,
            "exact_formula_prefactor_half",
            true,
            exact_formula,
        ),
        p(
            Suite::Rotinv,
            "prefactor_one_over_pi_rejected",
            true,
            rival_rejected,
        ),
        p(Suite::Rotinv, "small_angle_quadratic", true, small_angle),
        p(Suite::Solvers, "kkt_stationarity", false, kkt_residual),
        p(Suite::Solvers, "solver_agreement", false, solver_agreement),
        p(
            Suite::Solvers,
            "projected_gradient_monotone",
            false,
            pgd_monotone,
        ),
        p(
            Suite::Solvers,
            "calibration_bound_population",
            false,
            calibration_population,
        ),
        p(
            Suite::Solvers,
            "isotropic_direction_preserved",
            false,
            isotropy,
        ),
    ]
}

pub fn run_property(prop: &Property, trials: usize, seed: u64) -> PropertyOutcome {
    let trials = if prop.fixed { 1 } else { trials.max(1) };
    let checks: Vec<(u64, Check)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let s = split_seed(seed, t);
            (s, (prop.run)(s))
        })
        .collect();
    let worst_slack = checks
        .iter()
        .map(|(_, c)| c.slack)
        .fold(f64::INFINITY, f64::min);
    let failing: Vec<&(u64, Check)> = checks.iter().filter(|(_, c)| !(c.slack >= 0.0)).collect();
    PropertyOutcome {
        suite: prop.suite,
        name: prop.name,
        trials,
        worst_slack,
        violations: failing.len(),
        first_violation: failing.first().map(|(s, c)| Violation {
            seed: *s,
            slack: c.slack,
            instance: c.instance.clone(),
        }),
    }
}

pub fn run_suite(suite: Suite, trials: usize, seed: u64) -> Vec<PropertyOutcome> {
    properties()
        .iter()
        .filter(|p| suite.includes(p.suite))
        .map(|p| run_property(p, trials, seed))
        .collect()
}

/// Runs a single named property (`suite.name` or bare `name`).
pub fn run_named(name: &str, trials: usize, seed: u64) -> Option<PropertyOutcome> {
    properties()
        .iter()
        .find(|p| p.name == name || format!("{}.{}", p.suite.name(), p.name) == name)
        .map(|p| run_property(p, trials, seed))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_vec(d: usize, seed: u64) -> Vec<f64> {
    sample_features(&FeatureLaw::gaussian_iid(d, 1.0), 1, seed)
        .row(0)
        .to_vec()
}

fn vnorm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Minimum of a convex function on `[lo, hi]` by a coarse grid and ternary refinement.
fn convex_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let steps = 2000;
    let h = (hi - lo) / steps as f64;
    let best = (0..=steps)
        .map(|i| lo + i as f64 * h)
        .min_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap_or(lo);
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

fn random_pair(seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let d = r.random_range(1..=8);
    let u: Vec<f64> = gaussian_vec(d, split_seed(seed, 1))
        .iter()
        .map(|x| x * r.random_range(0.1..10.0))
        .collect();
    let v: Vec<f64> = gaussian_vec(d, split_seed(seed, 2))
        .iter()
        .map(|x| x * r.random_range(0.1..10.0))
        .collect();
    (u, v)
}

fn angle_rescaling(seed: u64) -> Check {
    let (u, v) = random_pair(seed);
    let c = 10f64.powf(rng(split_seed(seed, 3)).random_range(-3.0..3.0));
    let inst = format!("u={} v={} c={c}", fmt_vec(&u), fmt_vec(&v));
    let (Ok(u), Ok(v)) = (Vector::new(u), Vector::new(v)) else {
        return Check::failed("invalid vectors", inst);
    };
    match (angle_euclidean(&u, &v), angle_euclidean(&u.scaled(c), &v)) {
        (Ok(a), Ok(b)) => Check::new(1e-12 - (a.angle_rad - b.angle_rad).abs(), inst),
        (Err(e), _) | (_, Err(e)) => Check::failed(e, inst),
    }
}

fn angle_reflection(seed: u64) -> Check {
    let (u, v) = random_pair(seed);
    let inst = format!("u={} v={}", fmt_vec(&u), fmt_vec(&v));
    let (Ok(u), Ok(v)) = (Vector::new(u), Vector::new(v)) else {
        return Check::failed("invalid vectors", inst);
    };
    match (angle_euclidean(&u, &v), angle_euclidean(&u.neg(), &v)) {
        (Ok(a), Ok(b)) => Check::new(1e-12 - (a.angle_rad + b.angle_rad - PI).abs(), inst),
        (Err(e), _) | (_, Err(e)) => Check::failed(e, inst),
    }
}

fn sine_infimum(seed: u64) -> Check {
    let (u, mut v) = random_pair(seed);
    let uv: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
    if uv < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let inst = format!("u={} v={}", fmt_vec(&u), fmt_vec(&v));
    let nu = vnorm(&u);
    let nv = vnorm(&v);
    let dist = |t: f64| {
        u.iter()
            .zip(&v)
            .map(|(a, b)| (t * a - b / nv).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let oracle = convex_min(dist, 0.0, 1.0 / nu);
    let (Ok(uu), Ok(vv)) = (Vector::new(u.clone()), Vector::new(v.clone())) else {
        return Check::failed("invalid vectors", inst);
    };
    match angle_euclidean(&uu, &vv) {
        // an exactly orthogonal pair has no acute branch; its sine is 1 either way
        Ok(a) => Check::new(1e-6 - (a.sine - oracle).abs(), inst),
        Err(e) => Check::failed(e, inst),
    }
}

fn random_psd(seed: u64) -> CovarianceMatrix {
    let mut r = rng(seed);
    let d = r.random_range(1..=8);
    let k = r.random_range(1..=12);
    let a = sample_features(&FeatureLaw::gaussian_iid(k, 1.0), d, split_seed(seed, 1));
    let mut s = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let v: f64 = a
                .row(i)
                .iter()
                .zip(a.row(j))
                .map(|(x, y)| x * y)
                .sum::<f64>()
                / k as f64;
            s[i * d + j] = v;
            s[j * d + i] = v;
        }
    }
    CovarianceMatrix::new(d, s).unwrap_or_else(|_| CovarianceMatrix::identity(d))
}

fn psd_instance(sigma: &CovarianceMatrix) -> String {
    format!("d={} sigma={}", sigma.dim(), fmt_vec(sigma.as_slice()))
}

fn calibration_grid(seed: u64) -> Check {
    let sigma = random_psd(seed);
    let inst = psd_instance(&sigma);
    let d = sigma.dim();
    let trace: f64 = (0..d).map(|i| sigma.get(i, i)).sum();
    let op_norm = |a: f64| {
        let mut m: Vec<f64> = sigma.as_slice().iter().map(|x| a * x).collect();
        for i in 0..d {
            m[i * d + i] -= 1.0;
        }
        jacobi_eigen(d, &m)
            .map(|e| e.values.iter().fold(0.0f64, |acc, x| acc.max(x.abs())))
            .unwrap_or(f64::NAN)
    };
    // σ_max ≥ trace/d bounds the minimizer 2/(σ_max + σ_min) by 2d/trace
    let oracle = convex_min(op_norm, 0.0, 2.0 * d as f64 / trace);
    match calibration_bound(&sigma) {
        Ok(b) => Check::new(1e-6 - (b - oracle).abs(), inst),
        Err(e) => Check::failed(e, inst),
    }
}

fn eigen_scaling(seed: u64) -> Check {
    let sigma = random_psd(seed);
    let a = 10f64.powf(rng(split_seed(seed, 2)).random_range(-2.0..2.0));
    let inst = format!("{} a={a}", psd_instance(&sigma));
    match (
        eigenvalues_symmetric(&sigma),
        eigenvalues_symmetric(&sigma.scaled(a)),
    ) {
        (Ok(x), Ok(y)) => {
            let top = x[0].abs();
            let err = x
                .iter()
                .zip(&y)
                .map(|(p, q)| (a * p - q).abs())
                .fold(0.0, f64::max);
            Check::new(1e-10 * a * top - err, inst)
        }
        (Err(e), _) | (_, Err(e)) => Check::failed(e, inst),
    }
}

/// Random law, link, `β*` and predictor for the bound suites.
struct BoundInstance {
    law: FeatureLaw,
    link: LinkFunction,
    beta_star: Vector,
    beta: Vector,
    n: usize,
}

impl fmt::Display for BoundInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "law={} d={} scale={} rho={} link={} beta_star={} beta={} n_eval={}",
            self.law.kind.name(),
            self.law.dim,
            self.law.scale,
            self.law.correlation,
            self.link.name(),
            fmt_vec(self.beta_star.as_slice()),
            fmt_vec(self.beta.as_slice()),
            self.n
        )
    }
}

fn bound_instance(seed: u64) -> Result<BoundInstance, String> {
    let mut r = rng(seed);
    let d = r.random_range(2..=6);
    let kind = [
        FeatureKind::UniformIid,
        FeatureKind::GaussianIid,
        FeatureKind::CorrelatedUniform,
        FeatureKind::CorrelatedGaussian,
    ][r.random_range(0..4)];
    let scale = r.random_range(0.2..2.0);
    let rho = if kind.is_correlated() {
        r.random_range(-0.15..0.9)
    } else {
        0.0
    };
    let law = FeatureLaw {
        kind,
        dim: d,
        scale,
        correlation: rho,
    };
    let link = if kind.is_uniform() && r.random_bool(0.5) {
        LinkFunction::Linear
    } else {
        LinkFunction::Logistic
    };
    let mut star = Vector::new(gaussian_vec(d, split_seed(seed, 1))).map_err(|e| e.to_string())?;
    if link == LinkFunction::Linear {
        let target = r.random_range(0.05..0.5);
        star = star.scaled(target / law.support_bound(&star));
    } else {
        star = star.scaled(r.random_range(0.2..4.0));
    }
    let noise = gaussian_vec(d, split_seed(seed, 2));
    let spread = r.random_range(0.0..2.0) * star.norm();
    let base = match r.random_range(0..3) {
        0 => Vector::zeros(d),
        1 => star.clone(),
        _ => star.neg(),
    };
    let beta: Vec<f64> = base
        .as_slice()
        .iter()
        .zip(&noise)
        .map(|(b, e)| b + spread * e / d as f64)
        .collect();
    let beta = Vector::new(beta).map_err(|e| e.to_string())?;
    Ok(BoundInstance {
        law,
        link,
        beta_star: star,
        beta,
        n: 20_000,
    })
}

fn with_bound_instance(seed: u64, f: impl Fn(&BoundInstance) -> dirrec::Result<f64>) -> Check {
    match bound_instance(seed) {
        Ok(inst) => match f(&inst) {
            Ok(slack) => Check::new(slack, inst.to_string()),
            Err(e) => Check::failed(e, inst.to_string()),
        },
        Err(e) => Check::failed(e, format!("seed {seed}")),
    }
}

fn bound_validity(seed: u64) -> Check {
    with_bound_instance(seed, |i| {
        let eval = generate(&i.law, i.link, &i.beta_star, i.n, seed)?;
        // same seed, same feature draws as the evaluation sample
        let (excess, se) = excess_01_mc(&i.beta, &i.beta_star, &i.law, i.link, i.n, seed)?;
        Ok(bound_sin(&i.beta, &eval)? + 3.0 * se - excess)
    })
}

fn bound_ordering(seed: u64) -> Check {
    with_bound_instance(seed, |i| {
        let eval = generate(&i.law, i.link, &i.beta_star, i.n, seed)?;
        Ok(bound_bartlett(&i.beta, &eval)? + 1e-12 - bound_sin(&i.beta, &eval)?)
    })
}

fn margin_reduction(seed: u64) -> Check {
    with_bound_instance(seed, |i| {
        let eval = generate(&i.law, i.link, &i.beta_star, i.n, seed)?;
        let bs = bound_sin(&i.beta, &eval)?;
        let fstar = eval.fstar().unwrap_or_default();
        let norm = (fstar.iter().map(|x| x * x).sum::<f64>() / fstar.len().max(1) as f64).sqrt();
        let m = bound_margin(bs, norm, &MarginParams::new(0.0, 0.25)?)?;
        Ok(1e-12 * bs.max(1.0) - (m - bs).abs())
    })
}

fn disagreement_eq(seed: u64) -> Check {
    let mut slack = f64::INFINITY;
    let mut inst = Vec::new();
    for (k, d) in [2usize, 5].into_iter().enumerate() {
        let s = split_seed(seed, 10 + k as u64);
        let beta = gaussian_vec(d, split_seed(s, 1));
        let star = gaussian_vec(d, split_seed(s, 2));
        let law = FeatureLaw::gaussian_iid(d, 1.0);
        inst.push(format!(
            "d={d} beta={} beta_star={}",
            fmt_vec(&beta),
            fmt_vec(&star)
        ));
        let (Ok(b), Ok(bs)) = (Vector::new(beta), Vector::new(star)) else {
            return Check::failed("invalid vectors", inst.join("; "));
        };
        let theta = match angle_euclidean(&b, &bs) {
            Ok(a) => a.angle_rad,
            Err(e) => return Check::failed(e, inst.join("; ")),
        };
        match disagreement_probability_mc(&b, &bs, &law, 1_000_000, split_seed(s, 3)) {
            Ok((p, se)) => slack = slack.min(3.0 * se - (p - theta / PI).abs()),
            Err(e) => return Check::failed(e, inst.join("; ")),
        }
    }
    Check::new(slack, inst.join("; "))
}

pub const ROTINV_ANGLES: [f64; 4] = [PI / 12.0, FRAC_PI_6, FRAC_PI_4, FRAC_PI_2];

/// Mean and standard error of `|g|·1{sign f ≠ sign g}` with `f = <β,x>`,
/// `g = <β*,x>`, plus `E|g|`, for `β* = e₁` and `β` at angle θ in the (e₁, e₂) plane.
pub fn linear_excess_mc(d: usize, theta: f64, n: usize, seed: u64) -> (f64, f64, f64) {
    let x: Matrix = sample_features(&FeatureLaw::gaussian_iid(d, 1.0), n, seed);
    let (c, s) = (theta.cos(), theta.sin());
    let (mut sum, mut sum2, mut abs) = (0.0, 0.0, 0.0);
    for row in x.iter_rows() {
        let g = row[0];
        let f = c * row[0] + s * row[1];
        let v = if (f >= 0.0) != (g >= 0.0) {
            g.abs()
        } else {
            0.0
        };
        sum += v;
        sum2 += v * v;
        abs += g.abs();
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum2 / nf - mean * mean) * nf / (nf - 1.0);
    (mean, (var / nf).sqrt(), abs / nf)
}

fn rotinv_grid(seed: u64, slack: impl Fn(f64, f64, f64, f64) -> f64) -> Check {
    let mut worst = f64::INFINITY;
    let mut worst_inst = String::new();
    for (i, d) in [2usize, 5].into_iter().enumerate() {
        for (k, theta) in ROTINV_ANGLES.into_iter().enumerate() {
            let (mc, se, e_abs) =
                linear_excess_mc(d, theta, 1_000_000, split_seed(seed, (4 * i + k) as u64));
            let s = slack(theta, mc, se, e_abs);
            if s < worst {
                worst = s;
                worst_inst = format!("d={d} theta={theta} mc={mc} se={se} e_abs_fstar={e_abs}");
            }
        }
    }
    Check::new(worst, worst_inst)
}

fn exact_formula(seed: u64) -> Check {
    rotinv_grid(seed, |theta, mc, se, e_abs| {
        match excess_01_exact_rotinv(theta, e_abs) {
            Ok(exact) => 3.0 * se - (mc - exact).abs(),
            Err(_) => f64::NEG_INFINITY,
        }
    })
}

fn rival_rejected(seed: u64) -> Check {
    rotinv_grid(seed, |theta, mc, se, e_abs| {
        (mc - (1.0 - theta.cos()) * e_abs / PI).abs() - 10.0 * se
    })
}

fn small_angle(_seed: u64) -> Check {
    let mut worst = f64::INFINITY;
    for theta in [1e-2, 1e-3] {
        match excess_01_exact_rotinv(theta, 1.0) {
            Ok(v) => worst = worst.min(0.01 * 0.25 - (v / (theta * theta) - 0.25).abs()),
            Err(e) => return Check::failed(e, format!("theta={theta}")),
        }
    }
    Check::new(worst, "theta in {1e-2, 1e-3}, e_abs_fstar = 1")
}

/// Random correlated-gaussian regression problem with logistic labels.
fn regression_data(seed: u64, n: usize) -> Result<(dirrec::Dataset, String), String> {
    let mut r = rng(seed);
    let d = r.random_range(2..=8);
    let rho = r.random_range(0.0..0.85);
    let star: Vec<f64> = gaussian_vec(d, split_seed(seed, 1))
        .iter()
        .map(|x| 2.0 * x)
        .collect();
    let inst = format!(
        "law=correlated_gaussian d={d} rho={rho} beta_star={} n={n}",
        fmt_vec(&star)
    );
    let star = Vector::new(star).map_err(|e| format!("{inst} ({e})"))?;
    let data = generate(
        &FeatureLaw::correlated_gaussian(d, 1.0, rho),
        LinkFunction::Logistic,
        &star,
        n,
        seed,
    )
    .map_err(|e| format!("{inst} ({e})"))?;
    Ok((data, inst))
}

fn kkt_residual(seed: u64) -> Check {
    let (data, inst) = match regression_data(seed, 500) {
        Ok(v) => v,
        Err(e) => return Check::failed("generation failed", e),
    };
    let frac = rng(split_seed(seed, 5)).random_range(0.05..0.95);
    let inst = format!("{inst} radius_fraction={frac}");
    let run = || -> dirrec::Result<f64> {
        let stats = LeastSquaresStats::from_dataset(&data);
        let ols = fit_constrained_least_squares(&data, &ConstraintBall::unbounded())?;
        let r = frac * ols.beta_tilde.norm();
        let fit = fit_constrained_least_squares(&data, &ConstraintBall::new(r)?)?;
        let lambda = fit.lagrange_multiplier.unwrap_or(0.0);
        let b = fit.beta_tilde.as_slice();
        let sb = stats.sigma.mul_vec(b);
        let resid: Vec<f64> = (0..b.len())
            .map(|k| sb[k] + lambda * b[k] - stats.xty[k])
            .collect();
        let stationarity = 1e-8 * vnorm(&stats.xty) - vnorm(&resid);
        let on_sphere = 1e-9 * r - (fit.beta_tilde.norm() - r).abs();
        let active = if fit.active && lambda > 0.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        };
        Ok(stationarity.min(on_sphere).min(active))
    };
    match run() {
        Ok(s) => Check::new(s, inst),
        Err(e) => Check::failed(e, inst),
    }
}

fn solver_agreement(seed: u64) -> Check {
    let (data, inst) = match regression_data(seed, 500) {
        Ok(v) => v,
        Err(e) => return Check::failed("generation failed", e),
    };
    let frac = rng(split_seed(seed, 5)).random_range(0.05..1.5);
    let inst = format!("{inst} radius_fraction={frac}");
    let run = || -> dirrec::Result<f64> {
        let ols = fit_constrained_least_squares(&data, &ConstraintBall::unbounded())?;
        let ball = ConstraintBall::new(frac * ols.beta_tilde.norm())?;
        let closed = fit_constrained_least_squares(&data, &ball)?;
        let pgd = fit_projected_gradient(&data, LossKind::Square, &ball, 1_000_000, 1e-14)?;
        let gap = vnorm(&closed.beta_tilde.sub(&pgd.beta_tilde).into_inner());
        Ok((1e-6 - gap).min(1e-10 - (closed.objective_value - pgd.objective_value).abs()))
    };
    match run() {
        Ok(s) => Check::new(s, inst),
        Err(e) => Check::failed(e, inst),
    }
}

fn pgd_monotone(seed: u64) -> Check {
    let (data, inst) = match regression_data(seed, 300) {
        Ok(v) => v,
        Err(e) => return Check::failed("generation failed", e),
    };
    let radius = rng(split_seed(seed, 5)).random_range(0.05..5.0);
    let inst = format!("{inst} radius={radius}");
    let mut worst = f64::INFINITY;
    for loss in [LossKind::Square, LossKind::Logistic] {
        let ball = match ConstraintBall::new(radius) {
            Ok(b) => b,
            Err(e) => return Check::failed(e, inst),
        };
        match fit_projected_gradient(&data, loss, &ball, 5000, 1e-10) {
            Ok(fit) => {
                for w in fit.objective_trace.windows(2) {
                    worst = worst.min(w[0] + 1e-12 - w[1]);
                }
            }
            Err(e) => return Check::failed(e, inst),
        }
    }
    Check::new(worst, inst)
}

fn population_angle_check(
    seed: u64,
    law: FeatureLaw,
    inst: String,
    slack_for: impl Fn(f64, f64) -> f64,
) -> Check {
    let d = law.dim;
    let star = match Vector::new(
        gaussian_vec(d, split_seed(seed, 1))
            .iter()
            .map(|x| 2.0 * x)
            .collect(),
    ) {
        Ok(v) => v,
        Err(e) => return Check::failed(e, inst),
    };
    let frac = rng(split_seed(seed, 5)).random_range(0.01..0.99);
    let inst = format!(
        "{inst} beta_star={} n=100000 radius_fractions=[{frac}, 0.5, 0.1, 0.01]",
        fmt_vec(star.as_slice())
    );
    let run = || -> dirrec::Result<f64> {
        let data = generate(&law, LinkFunction::Logistic, &star, 100_000, seed)?;
        let bound = calibration_bound(&estimate_covariance(&data.features))?;
        let ols = fit_constrained_least_squares(&data, &ConstraintBall::unbounded())?;
        let mut worst = f64::INFINITY;
        for f in [frac, 0.5, 0.1, 0.01] {
            let fit = fit_constrained_least_squares(
                &data,
                &ConstraintBall::new(f * ols.beta_tilde.norm())?,
            )?;
            let sine = angle_euclidean(&fit.beta_tilde, &ols.beta_tilde)?.sine;
            worst = worst.min(slack_for(sine, bound));
        }
        Ok(worst)
    };
    match run() {
        Ok(s) => Check::new(s, inst),
        Err(e) => Check::failed(e, inst),
    }
}

fn calibration_population(seed: u64) -> Check {
    let mut r = rng(seed);
    let d = r.random_range(2..=6);
    let rho = r.random_range(0.1..0.9);
    let law = FeatureLaw::correlated_gaussian(d, 1.0, rho);
    let inst = format!("law=correlated_gaussian d={d} rho={rho}");
    population_angle_check(seed, law, inst, |sine, bound| bound + 5e-3 - sine)
}

fn isotropy(seed: u64) -> Check {
    let d = rng(seed).random_range(2..=6);
    let inst = format!("law=gaussian_iid d={d}");
    population_angle_check(seed, FeatureLaw::gaussian_iid(d, 1.0), inst, |sine, _| {
        5e-3 - sine
    })
}
