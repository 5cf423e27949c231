use std::path::PathBuf;

use thiserror::Error;

use crate::allocation::Action;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid catalog: {0}")]
    InvalidCatalog(String),

    #[error("invalid provider profile: {0}")]
    InvalidProfile(String),

    #[error("index {index} out of range (maximum {max})")]
    OutOfRange { index: usize, max: usize },

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("action {action} is infeasible in state {theta:?}")]
    InfeasibleAction { action: Action, theta: Vec<u64> },

    #[error("instance too large: {count} candidate allocations exceed the limit of {limit}")]
    InstanceTooLarge { count: u128, limit: u128 },

    #[error("undefined ratio: {0}")]
    UndefinedRatio(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed checkpoint at line {line}: {message}")]
    Checkpoint { line: usize, message: String },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
