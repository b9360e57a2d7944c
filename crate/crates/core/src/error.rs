use thiserror::Error;

/// Errors raised by the geometry and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid conformal factor: {0}")]
    InvalidFactor(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("numerical inconsistency: {0}")]
    Numerical(String),

    #[error("shortest-path strip exhausted for class ({m}, {n}) after {retries} widenings")]
    StripExhausted { m: i64, n: i64, retries: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
