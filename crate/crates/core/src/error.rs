use kropina_ratfun::RatFunError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),
    #[error("singular denominator in {0}")]
    SingularDenominator(String),
    #[error("degenerate flag: the flag denominator vanishes")]
    DegenerateFlag,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("exact backend unavailable: {0}")]
    ExactBackendUnavailable(String),
    #[error("no admissible direction found in {0} draws")]
    EmptyCone(u64),
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("derivative order exhausted: {0}")]
    OrderExhausted(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("expression error: {0}")]
    Expr(String),
    #[error("consistency check failed: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Algebra(#[from] RatFunError),
}

pub type Result<T> = std::result::Result<T, CoreError>;
