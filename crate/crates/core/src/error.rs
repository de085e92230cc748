use thiserror::Error;

/// Errors raised anywhere in the recovery pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty reduction")]
    EmptyReduction,
    #[error("nonpositive variance")]
    NonpositiveVariance,
    #[error("nonpositive pseudo-variance")]
    NonpositivePseudoVariance,
    #[error("channel unsupported for max-sum")]
    UnsupportedMaxSum,
    #[error("degenerate evidence")]
    DegenerateEvidence,
    #[error("out of feasibility box")]
    OutOfFeasibilityBox,
    #[error("invalid start")]
    InvalidStart,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("divergence at iteration {iteration}")]
    Divergence { iteration: usize },
    #[error("invalid covariance")]
    InvalidCovariance,
    #[error("degenerate row")]
    DegenerateRow,
    #[error("infeasible sparsity")]
    InfeasibleSparsity,
    #[error("undefined relative error")]
    UndefinedRelativeError,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid image: {0}")]
    Image(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
