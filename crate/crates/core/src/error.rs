use std::path::PathBuf;

/// Errors produced by this crate.
#[derive(Debug, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    /// Two objects that must share an alphabet do not.
    #[error("alphabet size mismatch: expected k={expected}, got k={found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Dataset sizes disagree (e.g. a schedule built for another n).
    #[error("dataset size mismatch: expected n={expected}, got n={found}")]
    SizeMismatch { expected: u64, found: u64 },

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A probability vector failed validation.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// A count vector failed validation.
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    /// `q = 0` reveals the data verbatim, so no finite epsilon exists.
    #[error("no finite privacy guarantee for q = 0 (likelihood ratio is unbounded)")]
    NoFinitePrivacy,

    /// Exhaustive enumeration would visit more count vectors than allowed.
    #[error("enumeration of {count} count vectors exceeds the cap of {cap}; use smaller n or k, or Monte Carlo")]
    EnumerationCap { count: u128, cap: u128 },

    /// Malformed input file.
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
