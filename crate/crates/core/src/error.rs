use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("record {row}: report date {report} precedes onset date {onset} for county {county}")]
    NegativeDelay {
        row: usize,
        county: String,
        onset: chrono::NaiveDate,
        report: chrono::NaiveDate,
    },

    #[error("unknown county `{0}`")]
    UnknownCounty(String),

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("series too short: need at least {needed} values, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid model state: {0}")]
    InvalidState(String),

    #[error("missing monitor `{0}` in posterior draws")]
    MissingMonitor(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}
