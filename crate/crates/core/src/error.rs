use serde::Serialize;
use thiserror::Error;

/// Diagnostics attached to a failed iterative solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    pub last_value: f64,
    pub residual: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown generator `{name}` (valid: {valid})")]
    UnknownGenerator { name: String, valid: String },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty input")]
    Empty,

    #[error("non-finite entry at index {idx}: {value}")]
    NonFinite { idx: usize, value: f64 },

    #[error("negative entry at index {idx}: {value}")]
    Negative { idx: usize, value: f64 },

    #[error("not normalized (expected sum≈1): sum={sum}")]
    NotNormalized { sum: f64 },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("solver failed: {message} ({diagnostics:?})")]
    Solver {
        message: String,
        diagnostics: SolveDiagnostics,
    },
}

impl Error {
    /// True for errors caused by bad inputs rather than numerical failure.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Solver { .. })
    }
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn ensure_same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(())
}

pub(crate) fn ensure_finite(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Empty);
    }
    for (idx, &value) in x.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { idx, value });
        }
    }
    Ok(())
}

/// Nonnegative, finite and summing to one within `tol`.
pub(crate) fn ensure_simplex(p: &[f64], tol: f64) -> Result<()> {
    ensure_finite(p)?;
    for (idx, &value) in p.iter().enumerate() {
        if value < 0.0 {
            return Err(Error::Negative { idx, value });
        }
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::NotNormalized { sum });
    }
    Ok(())
}
