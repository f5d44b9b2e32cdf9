use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid algorithm `{spec}`: {source}")]
    Algorithm { spec: String, source: abbo_core::Error },
    #[error(transparent)]
    Bench(#[from] abbo_bench::BenchError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed records: {0}")]
    Records(String),
    #[error("nothing to report: no records")]
    Empty,
    #[error("evaluator protocol error: {0}")]
    Protocol(String),
    #[error("invalid argument: {0}")]
    Usage(String),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }
}
