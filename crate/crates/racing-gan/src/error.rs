//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: expected {expected}, got {got}")]
    ShapeMismatch {
        op: &'static str,
        expected: String,
        got: String,
    },

    #[error("non-finite value produced by {op}")]
    NonFinite { op: &'static str },

    #[error("non-finite loss at iteration {iteration} while updating {network}")]
    NonFiniteLoss { iteration: usize, network: String },

    #[error("backward requires a scalar (1x1) loss, got {rows}x{cols}")]
    NotScalar { rows: usize, cols: usize },

    #[error("tape already consumed by a previous backward pass")]
    TapeConsumed,

    #[error("parameter {0:?} has no gradient; run backward and load grads first")]
    MissingGrad(String),

    #[error("duplicate parameter name {0:?}")]
    DuplicateParam(String),

    #[error("batch must be non-empty")]
    EmptyBatch,

    #[error("discriminator score {value} outside (0, 1)")]
    ScoreOutOfRange { value: f64 },

    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),

    #[error("curve band is invalid: {0}")]
    InvalidBand(String),

    #[error("quadratic fit is degenerate: {0}")]
    DegenerateFit(String),

    #[error("no analytic equilibrium target for the literal formulation; supply one explicitly")]
    NoAnalyticTarget,

    #[error("degenerate convergence band: target is zero under a relative band")]
    DegenerateConvergenceBand,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed CSV {path}: {reason}")]
    MalformedCsv { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
