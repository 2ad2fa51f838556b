//! Error type shared across the crate, with a stable mapping to CLI exit codes.

use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An input (dataset, record list, batch) violates a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Matrix or parameter dimensions do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A caller broke an API contract, e.g. reused a stale forward cache.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Soft targets do not form a probability distribution.
    #[error("invalid target: {0}")]
    InvalidTarget(String),

    /// A text input (CSV, config file) failed to parse.
    #[error("input format error at line {line}: {message}")]
    InputFormat { line: usize, message: String },

    /// Training produced a non-finite loss or gradient.
    #[error("training diverged at epoch {epoch}")]
    TrainingDiverged { epoch: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 1 invalid config/input, 2 training
    /// divergence, 3 I/O failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::TrainingDiverged { .. } => 2,
            Error::Io(_) => 3,
            _ => 1,
        }
    }
}
