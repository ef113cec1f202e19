use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("empty input: {0}")]
    Empty(String),
    #[error(
        "parse error at row {row}, column '{column}': cannot read '{value}' as a finite number"
    )]
    Parse {
        row: usize,
        column: String,
        value: String,
    },
    #[error("ragged input: row {row} has {found} fields, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate column name '{0}'")]
    DuplicateColumn(String),
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("insufficient sample: {0}")]
    InsufficientSample(String),
    #[error("singular matrix ({what}): reciprocal condition number {rcond:e} below {threshold:e}")]
    Singular {
        what: String,
        rcond: f64,
        threshold: f64,
    },
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("unstable autoregression: spectral radius {0} >= 1")]
    Unstable(f64),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input or usage).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. }
                | Error::NotPositiveDefinite(_)
                | Error::Unstable(_)
                | Error::Numerical(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
