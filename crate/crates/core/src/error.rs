//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("negative mass at component {index}: {value}")]
    NegativeMass { index: usize, value: f64 },

    #[error("total mass is zero or not finite")]
    ZeroTotalMass,

    #[error("normalization would move component {index} by {relative:.3e} (limit {limit:.3e})")]
    NormalizationTooLarge {
        index: usize,
        relative: f64,
        limit: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("shape mismatch between parameter sets: {0}")]
    ShapeMismatch(String),

    #[error("size {size} exceeds cap {cap}")]
    SizeOverflow { size: u128, cap: u128 },

    #[error("action entry {index} = {value} outside the allowed range")]
    BadActionRange { index: usize, value: f64 },

    #[error("unstable step: component {index} = {value:.3e} below -1e-12 (reduce dt)")]
    UnstableStep { index: usize, value: f64 },

    #[error("CFL violation: {0}")]
    CflViolation(String),

    #[error("negative density after step: component {index} = {value:.3e}")]
    NegativeDensity { index: usize, value: f64 },

    #[error("iteration cap {0} reached before convergence")]
    IterationCap(usize),

    #[error("buffer holds {size} transitions, {requested} requested")]
    BufferTooSmall { size: usize, requested: usize },

    #[error("non-finite gradient encountered")]
    NonFiniteGradient,

    #[error("non-finite loss at episode {episode}, step {step}")]
    NonFiniteLoss { episode: usize, step: usize },

    #[error("tables live on different grids or profile sets: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("bad file format: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
