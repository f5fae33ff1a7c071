use std::io;

use thiserror::Error;

use crate::trace::TraceRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// Malformed input file. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    /// A non-finite iterate was produced. The trace holds every record written
    /// before the failure, so it ends at the last finite iterate.
    #[error("{algorithm} diverged at outer iteration {iteration} (beta = {beta}, eta = {eta:e})")]
    Divergence {
        algorithm: String,
        iteration: usize,
        beta: f64,
        eta: f64,
        trace: Vec<TraceRecord>,
    },

    #[error("unsupported instance: {0}")]
    Unsupported(String),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("reference solver stopped after {iterations} iterations at gradient-mapping norm {achieved:e}")]
    NonConvergence {
        iterations: usize,
        achieved: f64,
        best: Vec<f64>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub(crate) fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, got })
    }
}
