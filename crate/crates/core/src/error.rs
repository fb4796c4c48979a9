use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector has zero norm")]
    ZeroVector,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not symmetric (max relative asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("matrix has no positive eigenvalue")]
    ZeroMatrix,
    #[error("linear link argument {0} outside [-1/2, 1/2]")]
    LinkDomain(f64),
    #[error("beta_star can reach |<beta_star, x>| = {0} > 1/2 on the feature support")]
    InvalidBetaStar(f64),
    #[error("degenerate design: empirical covariance is zero")]
    DegenerateDesign,
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed data at line {line}: {message}")]
    MalformedData { line: u64, message: String },
}

impl Error {
    /// Short stable identifier written to the `error_code` CSV column.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ZeroVector => "zero_vector",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotSymmetric(_) => "not_symmetric",
            Error::NotPsd(_) => "not_psd",
            Error::ZeroMatrix => "zero_matrix",
            Error::LinkDomain(_) => "link_domain",
            Error::InvalidBetaStar(_) => "invalid_beta_star",
            Error::DegenerateDesign => "degenerate_design",
            Error::NoConvergence(_) => "no_convergence",
            Error::Domain(_) => "domain",
            Error::NonFinite(_) => "non_finite",
            Error::InvalidConfig(_) => "invalid_config",
            Error::MalformedData { .. } => "malformed_data",
        }
    }
}
