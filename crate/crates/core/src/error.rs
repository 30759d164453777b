use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("weight function rejected: {0}")]
    InvalidWeight(String),

    #[error("problem rejected: {0}")]
    InvalidProblem(String),

    #[error(
        "quadrature did not reach tolerance {tol:e}: estimate {estimate} with error {achieved:e}"
    )]
    Quadrature {
        tol: f64,
        estimate: f64,
        achieved: f64,
    },

    #[error("zero pivot in tridiagonal solve at row {row}")]
    ZeroPivot { row: usize },

    #[error("coupling rule gives a non-integer grid at level {level}: {detail}")]
    NonIntegerGrid { level: usize, detail: String },

    #[error("expression error at {position}: {message}")]
    Expression { position: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
