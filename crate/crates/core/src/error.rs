use std::path::PathBuf;

use thiserror::Error;

use crate::gwf::SolverTrace;
use crate::lrmr::LiftedTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("value {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("eigendecomposition failed for {n}x{n} matrix (frobenius norm {frobenius:.3e}, max abs entry {max_abs:.3e})")]
    Eigen {
        n: usize,
        frobenius: f64,
        max_abs: f64,
    },

    /// The leading eigenvalue of the spectral matrix was not positive.
    #[error("spectral initialization failed: leading eigenvalue {lambda0:.6e} is not positive")]
    Initialization { lambda0: f64 },

    #[error("gradient iteration diverged at iteration {iteration}")]
    Divergence {
        iteration: usize,
        trace: Box<SolverTrace>,
    },

    #[error("lifted iteration diverged at iteration {iteration}")]
    LiftedDivergence {
        iteration: usize,
        trace: Box<LiftedTrace>,
    },

    #[error("format error at byte offset {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: usize, actual: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            actual,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
