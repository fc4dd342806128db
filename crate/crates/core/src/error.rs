use std::path::PathBuf;

use thiserror::Error;

use crate::graph::Time;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("invalid link event at position {index}: {reason}")]
    InvalidEvent { index: usize, reason: String },

    #[error("no eligible nodes at t={0}")]
    NoEligibleNodes(Time),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("pagerank did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("list size mismatch: expected n={expected}, got {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("metric undefined: {0}")]
    Undefined(&'static str),

    #[error("time span too small: [{t_min}, {t_max}] cannot be split into thirds")]
    SpanTooSmall { t_min: Time, t_max: Time },

    #[error("time {t} outside data span [{t_min}, {t_max}]")]
    OutOfSpan { t: Time, t_min: Time, t_max: Time },

    #[error("all {0} samples failed")]
    AllSamplesFailed(usize),

    #[error("{what}: {bad} of {total} lines rejected (first lines: {lines:?})")]
    TooManyRejected {
        what: &'static str,
        bad: usize,
        total: usize,
        lines: Vec<usize>,
    },

    #[error("{path}:{line}: {reason}")]
    Malformed {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
