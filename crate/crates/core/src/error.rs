use std::path::{Path, PathBuf};

use chrono::NaiveDate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {reason}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("configuration: {0}")]
    Config(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("day {day} is outside store coverage {start}..={end}")]
    OutOfCoverage {
        day: NaiveDate,
        start: NaiveDate,
        end: NaiveDate,
    },

    #[error("store has no coverage (no log files ingested)")]
    NoCoverage,

    #[error("article {0} has no words in its markup")]
    EmptyArticle(String),

    #[error("cohort of {0} is empty after deduplication")]
    EmptyCohort(String),

    #[error("article {0} has no usable neighbors")]
    NoNeighbors(String),

    #[error("median absolute deviation is zero (median {median})")]
    ZeroMad { median: f64 },

    #[error("windows must have equal non-zero length (before {before}, after {after})")]
    WrongWindowLength { before: usize, after: usize },

    #[error("volume change of {0} is undefined (no traffic in either window)")]
    UndefinedVolumeChange(String),

    #[error("no cohort member has a defined volume change")]
    EmptyCohortScores,

    #[error("empty input")]
    EmptyInput,

    #[error("http: {0}")]
    Http(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("{0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for problems with the user's inputs or configuration, as
    /// opposed to failures inside the computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::MalformedRecord { .. }
                | Error::Config(_)
                | Error::MissingInput(_)
                | Error::Csv(_)
                | Error::Json(_)
        )
    }

    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn malformed(path: impl AsRef<Path>, line: usize, reason: impl Into<String>) -> Self {
        Error::MalformedRecord {
            path: path.as_ref().to_path_buf(),
            line,
            reason: reason.into(),
        }
    }
}
