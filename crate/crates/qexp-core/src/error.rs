// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QexpError {
    /// A parameter violates a documented precondition (odd `N`, bad grid size, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The argument lies outside the domain of the function or operator.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature could not reach the requested accuracy.
    #[error("quadrature did not converge: error estimate {estimate:.3e} above tolerance {tolerance:.3e}")]
    Convergence { estimate: f64, tolerance: f64 },

    /// The operator descriptor does not support the requested calculus.
    #[error("unsupported operator: {0}")]
    Unsupported(String),

    /// Reading or writing a serialized state failed.
    #[error("i/o error: {0}")]
    Io(String),

    /// Malformed serialized input.
    #[error("parse error: {0}")]
    Parse(String),
}

impl QexpError {
    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, QexpError::Convergence { .. })
    }
}

impl From<std::io::Error> for QexpError {
    fn from(e: std::io::Error) -> Self {
        QexpError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, QexpError>;
