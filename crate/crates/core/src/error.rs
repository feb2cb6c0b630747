use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected:?}, got {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    /// A configuration or parameter value violates its documented range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A caller broke a precondition of an operation (e.g. a Lipschitz
    /// estimate outside its declared cap).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("inner solver did not converge after {iterations} iterations (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    InnerNonConvergence {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    /// A sub-solver failed during outer iteration `iteration`.
    #[error("outer iteration {iteration}: {source}")]
    Step {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("descent violated at iteration {iteration}: margin {margin:.6e} below tolerance -{tolerance:.3e}")]
    DescentViolation {
        iteration: usize,
        margin: f64,
        tolerance: f64,
    },

    #[error("non-finite value in {what} at iteration {iteration}")]
    NonFinite { what: &'static str, iteration: usize },

    #[error("unsupported or malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical method itself, as opposed to bad
    /// input or I/O.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::InnerNonConvergence { .. }
            | Error::DescentViolation { .. }
            | Error::NonFinite { .. } => true,
            Error::Step { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    /// True for configuration and contract failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::Contract(_)
                | Error::ShapeMismatch { .. }
                | Error::InvalidImage(_)
        )
    }
}
