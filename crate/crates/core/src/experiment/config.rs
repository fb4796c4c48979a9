use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::Vector;
use crate::risk::{MarginParams, DEFAULT_EVAL_SIZE};
use crate::surrogate::LossKind;
use crate::synth::{FeatureKind, FeatureLaw, LinkFunction};

pub const DEFAULT_TRAIN_SIZES: [usize; 7] = [100, 316, 1000, 3162, 10_000, 31_623, 100_000];
pub const DEFAULT_REPLICATES: usize = 50;
pub const DEFAULT_BASELINE_SIZE: usize = 1_000_000;
pub const DEFAULT_MAX_ITERS: usize = 20_000;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const MIN_EVAL_SIZE: usize = 1_000;
/// Replicate indices are packed below `train_size << 20` when deriving seeds.
pub const MAX_REPLICATES: usize = 1 << 19;

/// How the constraint radius is chosen for a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum RadiusSpec {
    Unbounded,
    Absolute(f64),
    /// Fraction of the norm of the population surrogate minimizer.
    RelativeToOptimum(f64),
}

impl RadiusSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || {
            Error::InvalidConfig(format!(
                "radius must be `inf`, a positive number or `tight:<fraction>`, got `{s}`"
            ))
        };
        if s == "inf" || s == "infinity" {
            return Ok(RadiusSpec::Unbounded);
        }
        let (ctor, num): (fn(f64) -> RadiusSpec, &str) = match s.strip_prefix("tight:") {
            Some(f) => (RadiusSpec::RelativeToOptimum, f),
            None => (RadiusSpec::Absolute, s),
        };
        let v: f64 = num.trim().parse().map_err(|_| bad())?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(bad());
        }
        Ok(ctor(v))
    }

    pub fn canonical(&self) -> String {
        match self {
            RadiusSpec::Unbounded => "inf".into(),
            RadiusSpec::Absolute(r) => format!("{r}"),
            RadiusSpec::RelativeToOptimum(f) => format!("tight:{f}"),
        }
    }
}

/// One simulation cell family: data-generating process, loss, constraint and sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub law: FeatureLaw,
    pub link: LinkFunction,
    pub beta_star: Vector,
    pub loss: LossKind,
    pub radius: RadiusSpec,
    pub train_sizes: Vec<usize>,
    pub replicates: usize,
    pub eval_size: usize,
    pub base_seed: u64,
    pub margin_params: Option<MarginParams>,
    /// Held-out size used once for the population surrogate minimizer.
    pub baseline_size: usize,
    pub max_iters: usize,
    pub tolerance: f64,
}

impl ExperimentConfig {
    pub fn new(
        law: FeatureLaw,
        link: LinkFunction,
        beta_star: Vector,
        loss: LossKind,
        radius: RadiusSpec,
    ) -> Self {
        ExperimentConfig {
            law,
            link,
            beta_star,
            loss,
            radius,
            train_sizes: DEFAULT_TRAIN_SIZES.to_vec(),
            replicates: DEFAULT_REPLICATES,
            eval_size: DEFAULT_EVAL_SIZE,
            base_seed: 0,
            margin_params: None,
            baseline_size: DEFAULT_BASELINE_SIZE,
            max_iters: DEFAULT_MAX_ITERS,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.law.validate()?;
        if self.beta_star.dim() != self.law.dim {
            return Err(Error::InvalidConfig(format!(
                "beta_star has dimension {} but the feature law has {}",
                self.beta_star.dim(),
                self.law.dim
            )));
        }
        if self.train_sizes.is_empty() || self.train_sizes.contains(&0) {
            return Err(Error::InvalidConfig(
                "train_sizes must be nonempty and positive".into(),
            ));
        }
        if self.train_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "train_sizes must be strictly ascending".into(),
            ));
        }
        if self.replicates == 0 || self.replicates > MAX_REPLICATES {
            return Err(Error::InvalidConfig(format!(
                "replicates must lie in 1..={MAX_REPLICATES}"
            )));
        }
        if self.eval_size < MIN_EVAL_SIZE {
            return Err(Error::InvalidConfig(format!(
                "eval_size must be at least {MIN_EVAL_SIZE}"
            )));
        }
        if self.baseline_size < MIN_EVAL_SIZE {
            return Err(Error::InvalidConfig(format!(
                "baseline_size must be at least {MIN_EVAL_SIZE}"
            )));
        }
        if self.max_iters == 0 || !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig(
                "max_iters >= 1 and tolerance > 0 required".into(),
            ));
        }
        if let Some(m) = &self.margin_params {
            m.validate()
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        }
        if self.link == LinkFunction::Linear {
            let bound = self.law.support_bound(&self.beta_star);
            if bound > 0.5 + 1e-12 {
                return Err(Error::InvalidBetaStar(bound));
            }
        }
        Ok(())
    }

    /// Flat `key = value` text; every field, fixed order, shortest round-trip numbers.
    pub fn to_canonical_string(&self) -> String {
        let mut s = String::new();
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        let _ = writeln!(s, "law = {}", self.law.kind.name());
        let _ = writeln!(s, "scale = {}", self.law.scale);
        let _ = writeln!(s, "correlation = {}", self.law.correlation);
        let _ = writeln!(s, "link = {}", self.link.name());
        let _ = writeln!(s, "beta_star = {}", join(self.beta_star.as_slice()));
        let _ = writeln!(s, "loss = {}", self.loss.name());
        let _ = writeln!(s, "radius = {}", self.radius.canonical());
        let sizes: Vec<String> = self.train_sizes.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "train_sizes = {}", sizes.join(","));
        let _ = writeln!(s, "replicates = {}", self.replicates);
        let _ = writeln!(s, "eval_size = {}", self.eval_size);
        let _ = writeln!(s, "base_seed = {}", self.base_seed);
        let _ = writeln!(s, "baseline_size = {}", self.baseline_size);
        let _ = writeln!(s, "max_iters = {}", self.max_iters);
        let _ = writeln!(s, "tolerance = {}", self.tolerance);
        if let Some(m) = &self.margin_params {
            let _ = writeln!(s, "alpha = {}", m.alpha);
            let _ = writeln!(s, "c_prime = {}", m.c_prime);
        }
        s
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_canonical_string().as_bytes()))
    }

    /// Parses the flat config format. `#` starts a comment; `law`, `link`,
    /// `beta_star` and `loss` are required, everything else has a default.
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let k = k.trim().to_string();
            if kv.iter().any(|(existing, _)| *existing == k) {
                return Err(Error::InvalidConfig(format!(
                    "line {}: duplicate key `{k}`",
                    lineno + 1
                )));
            }
            kv.push((k, v.trim().to_string()));
        }
        let get = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        const KNOWN: [&str; 16] = [
            "law",
            "scale",
            "correlation",
            "link",
            "beta_star",
            "loss",
            "radius",
            "train_sizes",
            "replicates",
            "eval_size",
            "base_seed",
            "baseline_size",
            "max_iters",
            "tolerance",
            "alpha",
            "c_prime",
        ];
        if let Some((k, _)) = kv.iter().find(|(k, _)| !KNOWN.contains(&k.as_str())) {
            return Err(Error::InvalidConfig(format!("unknown key `{k}`")));
        }
        let required = |key: &str| {
            get(key).ok_or_else(|| Error::InvalidConfig(format!("missing key `{key}`")))
        };
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::InvalidConfig(format!("`{key}` has invalid value `{v}`")))
        }

        let kind = FeatureKind::parse(required("law")?)?;
        let beta: Vec<f64> = required("beta_star")?
            .split(',')
            .map(|x| num::<f64>("beta_star", x.trim()))
            .collect::<Result<_>>()?;
        let beta_star =
            Vector::new(beta).map_err(|e| Error::InvalidConfig(format!("beta_star: {e}")))?;
        let scale = get("scale")
            .map(|v| num("scale", v))
            .transpose()?
            .unwrap_or(1.0);
        let correlation = match get("correlation") {
            Some(v) => num("correlation", v)?,
            None if kind.is_correlated() => crate::synth::DEFAULT_CORRELATION,
            None => 0.0,
        };
        let law = FeatureLaw {
            kind,
            dim: beta_star.dim(),
            scale,
            correlation,
        };
        let mut cfg = ExperimentConfig::new(
            law,
            LinkFunction::parse(required("link")?)?,
            beta_star,
            LossKind::parse(required("loss")?)?,
            get("radius")
                .map(RadiusSpec::parse)
                .transpose()?
                .unwrap_or(RadiusSpec::Unbounded),
        );
        if let Some(v) = get("train_sizes") {
            cfg.train_sizes = v
                .split(',')
                .map(|x| num::<usize>("train_sizes", x.trim()))
                .collect::<Result<_>>()?;
        }
        if let Some(v) = get("replicates") {
            cfg.replicates = num("replicates", v)?;
        }
        if let Some(v) = get("eval_size") {
            cfg.eval_size = num("eval_size", v)?;
        }
        if let Some(v) = get("base_seed") {
            cfg.base_seed = num("base_seed", v)?;
        }
        if let Some(v) = get("baseline_size") {
            cfg.baseline_size = num("baseline_size", v)?;
        }
        if let Some(v) = get("max_iters") {
            cfg.max_iters = num("max_iters", v)?;
        }
        if let Some(v) = get("tolerance") {
            cfg.tolerance = num("tolerance", v)?;
        }
        cfg.margin_params = match (get("alpha"), get("c_prime")) {
            (None, None) => None,
            (Some(a), Some(c)) => Some(MarginParams {
                alpha: num("alpha", a)?,
                c_prime: num("c_prime", c)?,
            }),
            _ => {
                return Err(Error::InvalidConfig(
                    "`alpha` and `c_prime` must be given together".into(),
                ))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
