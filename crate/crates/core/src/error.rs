use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A model parameter violates one of its physical constraints.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// An argument fell outside the domain of an operation.
    #[error("{module}::{operation}: argument {value} outside {domain}")]
    Domain {
        module: &'static str,
        operation: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// An iterative scheme did not meet its tolerance.
    #[error("{module}::{operation}: no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        module: &'static str,
        operation: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// An operation was asked for a value that is undefined at a kink.
    #[error("{module}::{operation}: {message}")]
    Undefined {
        module: &'static str,
        operation: &'static str,
        message: String,
    },
}

impl Error {
    /// Module that raised the error, when it has one.
    pub fn module(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "params",
            Error::Domain { module, .. }
            | Error::NonConvergence { module, .. }
            | Error::Undefined { module, .. } => module,
        }
    }

    pub fn operation(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "validate",
            Error::Domain { operation, .. }
            | Error::NonConvergence { operation, .. }
            | Error::Undefined { operation, .. } => operation,
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. })
    }
}
