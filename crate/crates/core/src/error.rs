use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid synthesis spec: {0}")]
    InvalidSpec(String),

    #[error("pauli strings {0} and {1} commute; conjugation would be trivial")]
    CommutingPair(String, String),

    #[error("support of {0} is not connected in the allowed coupling graph")]
    DisconnectedSupport(String),

    #[error("integration unstable at t = {t}: trace error {trace_error:e}, min eigenvalue {min_eig:e}")]
    Unstable { t: f64, trace_error: f64, min_eig: f64 },

    #[error("trajectory {index} overflowed at step {step} (norm {norm:e})")]
    TrajectoryOverflow { index: u64, step: usize, norm: f64 },

    #[error("too many excluded trajectories: {excluded} of {total}")]
    TooManyExclusions { excluded: usize, total: usize },

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
