//! Error and diagnostic types shared across the crate.

use thiserror::Error;

/// Severity of a validation diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    /// The input is unusable.
    Error,
    /// The input is usable but something looks suspicious.
    Warning,
}

/// One finding from input validation.
#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    pub fn error(message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, message: message.into() }
    }

    pub fn warning(message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, message: message.into() }
    }
}

/// Errors produced by the computational pipeline.
#[derive(Debug, Error)]
pub enum CoreError {
    /// The input data failed validation. Carries every error-level finding.
    #[error("invalid input: {}", summarize(.0))]
    InvalidInput(Vec<Diagnostic>),

    /// A well-formed computation could not be completed, for example a
    /// top-cell solve with no solution in the group ring.
    #[error("computation failed: {0}")]
    Computation(String),

    /// An internal cross-check failed. This always indicates a bug, never
    /// bad input, and is surfaced loudly instead of being swallowed.
    #[error("internal consistency failure (this is a bug): {0}")]
    Internal(String),
}

impl CoreError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CoreError::InvalidInput(vec![Diagnostic::error(message)])
    }

    pub fn computation(message: impl Into<String>) -> Self {
        CoreError::Computation(message.into())
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CoreError::Internal(message.into())
    }
}

fn summarize(diags: &[Diagnostic]) -> String {
    let errors: Vec<&str> = diags
        .iter()
        .filter(|d| d.severity == Severity::Error)
        .map(|d| d.message.as_str())
        .collect();
    if errors.is_empty() {
        "no error-level diagnostics".to_string()
    } else {
        errors.join("; ")
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
