use thiserror::Error;

/// Errors raised by germ construction, sampling, estimation and checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no points found in annulus {0}")]
    NoPointsFound(usize),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("cone base is empty")]
    EmptyBase,
    #[error("cloud is empty")]
    EmptyCloud,
    #[error("direction set is empty")]
    EmptyDirectionSet,
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("schedule has {0} scales, at least 4 are required")]
    InsufficientScales(usize),
    #[error("map is not bi-Lipschitz near 0 (minimum ratio dropped by {drop_factor:.3e}x across the schedule)")]
    NotBiLipschitz { drop_factor: f64 },
    #[error("denominator has only {hits} hits at eps = {eps:e}")]
    DivisionUnstable { eps: f64, hits: u64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
