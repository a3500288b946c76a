use std::path::PathBuf;

use thiserror::Error;

use crate::constraint::Diagnostic;

/// Errors surfaced by the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("observable `{0}` is not produced by the model")]
    MissingObservable(String),

    #[error("{context}: time {time} is outside the simulated range [{start}, {end}]")]
    OutOfRange {
        context: String,
        time: f64,
        start: f64,
        end: f64,
    },

    #[error("{0}")]
    Parse(Diagnostic),

    #[error("invalid data in {path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error("simulation failed: {0}")]
    Simulation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<Diagnostic> for Error {
    fn from(d: Diagnostic) -> Self {
        Error::Parse(d)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
