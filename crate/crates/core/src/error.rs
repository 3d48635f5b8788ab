use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(
        "domain truncation too aggressive: boundary density ratio {ratio:e} exceeds {tolerance:e}"
    )]
    Truncation { ratio: f64, tolerance: f64 },

    #[error("quadrature did not converge after {panels} panels (last change {change:e})")]
    Quadrature { panels: usize, change: f64 },

    #[error("internal consistency check failed: {what} (discrepancy {discrepancy:e})")]
    Consistency {
        what: &'static str,
        discrepancy: f64,
    },

    #[error("weight is not positive at x = {x} (value {value:e})")]
    Weight { x: f64, value: f64 },

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("matrix is not symmetric positive definite: pivot {pivot:e} at row {row}")]
    NotSpd { row: usize, pivot: f64 },

    #[error("eigensolver did not converge in {iterations} iterations (residuals {residuals:?})")]
    Convergence {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("{0}")]
    Domain(&'static str),
}

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
