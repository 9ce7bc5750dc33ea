use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state space of {states} configurations exceeds the enumeration limit of {limit}")]
    Capacity { states: u128, limit: u128 },

    #[error("energy {energy} is not on the energy ladder")]
    OffLadder { energy: i64 },

    #[error("iteration ordering violated: {0}")]
    Ordering(String),

    #[error("reference log-DOS at level {level} (energy {energy}) is too close to zero after anchoring")]
    DegenerateReference { level: usize, energy: i64 },

    #[error("config line {line}: {message}")]
    ConfigLine { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("seed {seed}: {source}")]
    Replicate {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by user input (bad config, bad files, bad arguments)
    /// as opposed to failures during a run.
    pub fn is_config(&self) -> bool {
        match self {
            Error::InvalidArgument(_)
            | Error::ConfigLine { .. }
            | Error::Config(_)
            | Error::Capacity { .. }
            | Error::Format { .. } => true,
            Error::Replicate { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
