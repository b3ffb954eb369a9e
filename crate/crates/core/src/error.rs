use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid subsystem dimension {0}: every dimension must be at least 2")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operators live on different Hilbert spaces ({left:?} vs {right:?})")]
    SpaceMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("subsystem position {position} out of range for a {len}-mode space")]
    PositionOutOfRange { position: usize, len: usize },

    #[error("truncation {dim} for {what} is too small (need at least {min})")]
    TruncationTooSmall {
        what: &'static str,
        dim: usize,
        min: usize,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("no unique steady state: {0}")]
    NoUniqueSteadyState(String),

    #[error("mode {position} is unoccupied (<n> = {occupation:e})")]
    UnoccupiedMode { position: usize, occupation: f64 },

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("amplitude integration diverged at t = {0}")]
    Divergence(f64),

    #[error("adiabatic regime violated: {0}")]
    RegimeViolation(String),

    #[error("invalid axis {name}: {reason}")]
    InvalidAxis { name: String, reason: String },

    #[error("{0}")]
    Unsupported(String),
}
