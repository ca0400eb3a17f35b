use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by configuration parsing, simulation setup and the sweep harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {key}: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("time {requested_s} s is outside the observation interval [{start_s}, {end_s}]")]
    OutsideInterval {
        requested_s: f64,
        start_s: f64,
        end_s: f64,
    },

    #[error("pair has fewer than two receptions")]
    NotCommunicating,

    #[error("relative speed {0} m/s is below the validity floor")]
    LowRelativeSpeed(f64),

    #[error("missing sweep slice {requested}; available: {available}")]
    MissingSlice { requested: String, available: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(key: &str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
