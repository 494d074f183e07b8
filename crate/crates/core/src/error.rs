use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parameter schedule infeasible: {0}")]
    ScheduleInfeasible(String),

    #[error("invalid vector: {0}")]
    InvalidVector(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("support size {size} exceeds the exhaustive limit of {limit}")]
    SupportTooLarge { size: usize, limit: usize },

    #[error("non-finite input component")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no dyadic smoothing parameter certifies dimension {k} at theta = {theta}")]
    CalibrationFailed { k: usize, theta: f64 },

    #[error("nu(x) = {nu} exceeds 1")]
    NuTooLarge { nu: f64 },

    #[error("nu(x) = {nu} is outside the domain where the bump series is evaluated")]
    DomainExceeded { nu: f64 },

    #[error("decay inequality still fails at k = {k_hi}")]
    NotReached { k_hi: usize },

    #[error("k!·(r-1)^k overflows for k = {k}, r = {r}")]
    Overflow { k: usize, r: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
