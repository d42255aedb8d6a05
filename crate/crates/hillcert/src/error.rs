//! Error type shared by all public operations.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally invalid input (wrong sizes, malformed files, bad flags).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A matrix handed to the Hermitian eigensolver was not Hermitian.
    #[error("matrix not Hermitian: defect {defect:.3e} exceeds threshold {threshold:.3e}")]
    NotHermitian { defect: f64, threshold: f64 },

    /// The isolation condition required for a certified bound does not hold.
    #[error("isolation condition failed: {0}")]
    IsolationFailed(String),

    /// Not enough usable data points for a fit or identification.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// An iterative kernel exceeded its iteration budget.
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
