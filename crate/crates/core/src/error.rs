use thiserror::Error;

/// Errors raised by the exact-arithmetic substrate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("element is not invertible: {0}")]
    NotInvertible(String),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("characteristic too small for this operation (need 0 or p > {need}, got {got})")]
    CharacteristicTooSmall { need: usize, got: u64 },
    #[error("dependent rows in lattice basis")]
    DependentRows,
    #[error("insufficient p-adic precision: {0}")]
    InsufficientPrecision(String),
    #[error("series error: {0}")]
    Series(String),
    #[error("recurrence division by zero at index {index}")]
    RecurrenceFailure { index: usize },
    #[error("{0}")]
    Other(String),
}

/// Errors raised by the higher pipeline stages.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("invalid pattern data: {0}")]
    Pattern(String),
    #[error("scan error: {0}")]
    Scan(String),
    #[error("non-generic candidate; try another prime/frame: {0}")]
    SingularJacobian(String),
    #[error("recognition failed: {0}")]
    Recognition(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("catalog error: {0}")]
    Catalog(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type AResult<T> = Result<T, AlgebraError>;
pub type PResult<T> = Result<T, PipelineError>;
