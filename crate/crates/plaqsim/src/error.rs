use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("Hilbert space dimension {dim} exceeds the size bound {bound}")]
    SizeBound { dim: usize, bound: usize },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("unsupported truncation: {0}")]
    UnsupportedTruncation(String),

    #[error("circuit width {circuit} does not match state width {state}")]
    WidthMismatch { circuit: usize, state: usize },

    #[error("invalid noise parameter: {0}")]
    InvalidNoise(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("sector matrix is singular")]
    SingularMatrix,

    #[error("constrained solver did not converge: {0}")]
    NonConvergence(String),

    #[error("post-selection undefined: zero survival probability")]
    ZeroSurvival,

    #[error("noise scale r = {0} is not supported (expected 1 or 2)")]
    UnsupportedNoiseScale(u32),

    #[error("non-symmetric matrix: {0}")]
    NotSymmetric(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
