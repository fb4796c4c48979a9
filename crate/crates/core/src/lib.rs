//! Angle-based excess 0-1 risk for linear surrogate classifiers.
//!
//! A linear classifier `x ↦ sign<β, x>` only depends on the direction of `β`,
//! so its excess 0-1 risk is controlled by the angle between `β` and the
//! optimal predictor rather than by their distance. This crate provides:
//!
//! * [`geometry`]: Euclidean and empirical `L²(P)` angles, covariance
//!   estimation, Jacobi eigenvalues and the spectral calibration bound.
//! * [`synth`]: seeded feature laws, link functions and label draws.
//! * [`surrogate`]: square and logistic losses with ball-constrained solvers.
//! * [`risk`]: Monte Carlo and exact excess risks and the angle-based bounds.
//! * [`experiment`]: sweeps over training sizes and replicates, verdicts and
//!   the fixed figure grids.

pub mod error;
pub mod experiment;
pub mod geometry;
pub mod risk;
pub mod surrogate;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{AngleReport, CovarianceMatrix, InnerProductSign, Matrix, Vector};
pub use surrogate::{ConstraintBall, FitResult, LossKind};
pub use synth::{Dataset, FeatureKind, FeatureLaw, LinkFunction};
