use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure of a single objective evaluation.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("failed to spawn `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("command exited with {status}; stderr: {stderr}")]
    NonZeroExit { status: String, stderr: String },
    #[error("command timed out after {timeout:?}; stderr: {stderr}")]
    Timeout { timeout: Duration, stderr: String },
    #[error("malformed command output ({reason}): {stdout:?}; stderr: {stderr}")]
    MalformedOutput {
        reason: String,
        stdout: String,
        stderr: String,
    },
    #[error("objective returned a non-finite value {0}")]
    NonFinite(f64),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("arm enumeration would produce {product} arms, above the cap of {cap}")]
    ArmCapExceeded { product: u128, cap: u128 },
    #[error("point out of bounds: {0}")]
    OutOfBounds(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("kernel matrix factorization failed even with jitter {jitter:e}")]
    Factorization { jitter: f64 },
    #[error("evaluation failed at iteration {iteration}: {source}")]
    Evaluation {
        iteration: usize,
        #[source]
        source: EvalError,
    },
    #[error("unsupported state version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
