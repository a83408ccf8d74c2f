use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("invalid space config: {0}")]
    InvalidSpace(String),

    #[error("matrix is not orthogonal: max |MᵀM - I| = {deviation:e} exceeds {tolerance:e}")]
    NotOrthogonal { deviation: f64, tolerance: f64 },

    #[error("orthogonalization failed: column {column} vanished after {retries} retries")]
    Orthogonalization { column: usize, retries: usize },

    #[error("empty name")]
    EmptyName,

    #[error("bad magic")]
    BadMagic,

    #[error("unsupported format version {0}")]
    Version(u8),

    #[error("truncated stream")]
    Truncated,

    #[error("malformed data: {0}")]
    Malformed(String),

    #[error("duplicate key {0:?}")]
    DuplicateKey(String),

    #[error("duplicate id {0:?}")]
    DuplicateId(String),

    #[error("non-finite number {0}")]
    NonFiniteNumber(f64),

    #[error("invalid encoding config: {0}")]
    Config(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
