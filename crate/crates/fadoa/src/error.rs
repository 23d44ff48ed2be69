//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by geometry construction, estimators, and the experiment
/// harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A domain value failed its construction invariant.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Matrix dimensions do not line up.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        got: String,
    },

    /// Non-finite value where a finite one is required.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// Argument outside the supported evaluation range.
    #[error("argument out of range: {0}")]
    OutOfRange(String),

    /// The differential phase of the covariance reconstruction protocol is a
    /// multiple of pi/2, making the two-measurement system singular.
    #[error("singular phase configuration: sin(2*alpha) = 0 at alpha = {alpha} rad")]
    SingularPhaseConfig { alpha: f64 },

    /// A peak search found fewer maxima than requested.
    #[error("resolution failure: found {found} peaks, needed {requested}")]
    ResolutionFailure { found: usize, requested: usize },

    /// A matrix that must be inverted is singular to working precision.
    #[error("singular matrix in {context}: {detail}")]
    SingularMatrix {
        context: &'static str,
        detail: String,
    },

    /// Experiment configuration is invalid; every problem is listed.
    #[error("invalid configuration:\n{}", issues.join("\n"))]
    InvalidConfig { issues: Vec<String> },

    /// Underlying I/O failure while writing results.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure for configs and manifests.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
