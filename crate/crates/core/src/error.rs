use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by estimators, oracles and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mean of the loss law is not finite ({0})")]
    NonIntegrable(String),

    #[error("slope fit needs at least 3 positive points, got {0}")]
    InsufficientPoints(usize),

    #[error("median-of-means blocks of size {block_size} are degenerate (need at least 2)")]
    DegenerateBlocks { block_size: usize },

    #[error("hypothesis net has {size} points, above the cap of {cap}")]
    NetTooLarge { size: usize, cap: usize },

    #[error("Newton solve did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Jacobian is singular (condition number {condition:e})")]
    Singular { condition: f64 },

    #[error("config line {line}, key `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
