use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("overlap matrix is linearly dependent (smallest eigenvalue {min_eigenvalue:e})")]
    LinearDependence { min_eigenvalue: f64 },

    #[error("degenerate orbitals at {location}: {lower:.12} vs {upper:.12}")]
    Degenerate {
        location: String,
        lower: f64,
        upper: f64,
    },

    #[error("SCF did not converge after {iterations} iterations (max |dD| = {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("embedding error: {0}")]
    Embedding(String),

    #[error(
        "bracket [{lo}, {hi}] does not straddle target {target} (counts {count_lo}, {count_hi})"
    )]
    Bracket {
        lo: f64,
        hi: f64,
        target: f64,
        count_lo: f64,
        count_hi: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("objective failed at {point:?}: {msg}")]
    Objective { point: Vec<f64>, msg: String },
}

/// Coarse classification used by front ends to choose exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Data,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse { .. }
            | Error::Io { .. }
            | Error::InvalidInput(_)
            | Error::Dimension(_)
            | Error::Dataset(_) => ErrorClass::Data,
            _ => ErrorClass::Numerical,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
