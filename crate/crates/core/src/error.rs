use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("invalid block layout: {0}")]
    InvalidDims(String),

    #[error("certificate violation: {0}")]
    CertificateViolation(String),

    #[error("matrix is not positive definite: pivot {pivot} has value {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    EigenNoConvergence { iterations: usize },

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    CgNoConvergence { iterations: usize, residual: f64 },

    #[error("block operator has no diagonal block for component {0}")]
    MissingDiagonalBlock(usize),

    #[error("operator is not block {expected}-triangular: block ({row}, {col}) is present")]
    NotTriangular {
        expected: &'static str,
        row: usize,
        col: usize,
    },

    #[error("solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("scheme not applicable: {0}")]
    SchemeInapplicable(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("three-level step requires the previous level y^(n-1)")]
    MissingPreviousLevel,

    #[error("closed-form reference does not support this forcing")]
    UnsupportedForcing,

    #[error("step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn dims(context: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            context,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            e @ Error::Step { .. } => e,
            e => Error::Step {
                step,
                source: Box::new(e),
            },
        }
    }
}
