use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config is missing key `{0}`")]
    MissingKey(String),

    #[error("invalid value for `{key}`: {msg}")]
    Invalid { key: String, msg: String },

    #[error(transparent)]
    Core(#[from] fibering::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("{0} selftest check(s) failed")]
    SelftestFailed(usize),
}

pub type CliResult<T> = std::result::Result<T, CliError>;
