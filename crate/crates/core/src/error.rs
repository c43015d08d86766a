use std::io;

use thiserror::Error;

/// Errors raised while configuring or running dissemination experiments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("failure plan error: {0}")]
    Plan(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("rumor schedule error: {0}")]
    Schedule(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
