use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RatFunError {
    #[error("division by the zero rational function")]
    DivisionByZero,
    #[error("radicand is the zero polynomial")]
    ZeroRadicand,
    #[error("radicand {0} is a constant multiple of a perfect square; w would not extend the field")]
    PerfectSquareRadicand(String),
    #[error("operands carry different radicands")]
    RadicandMismatch,
}
