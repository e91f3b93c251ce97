use std::io;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown table '{0}'")]
    UnknownTable(String),
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("encoding '{encoding}' is not applicable to {column_type} columns")]
    InapplicableEncoding {
        encoding: &'static str,
        column_type: &'static str,
    },
    #[error("corrupt storage: {0}")]
    Corrupt(String),
    #[error("cannot satisfy K-safety: {0}")]
    KSafety(String),
    #[error("cluster unsafe: {0}")]
    ClusterUnsafe(String),
    #[error("node {0} is down")]
    NodeDown(usize),
    #[error("recovery failed: {0}")]
    Recovery(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("plan error: {0}")]
    Plan(String),
    #[error("resource exhausted: {0}")]
    ResourceExhausted(String),
    #[error("refresh error: {0}")]
    Refresh(String),
    #[error("configuration is frozen while a benchmark run is in progress (attempted: {0})")]
    ConfigFrozen(String),
    #[error("benchmark error: {0}")]
    Bench(String),
    #[error("batch error: {0}")]
    Batch(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Zip(#[from] zip::result::ZipError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
