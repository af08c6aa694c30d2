use thiserror::Error;

/// Errors raised by the numeric core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CevError {
    /// An argument is outside the legal domain of an operation.
    #[error("{field}: {reason}")]
    Domain { field: &'static str, reason: String },

    /// A series or continued fraction exhausted its term budget before the
    /// tail bound fell below the requested tolerance.
    #[error("series did not converge within {terms} terms ({context})")]
    NonConvergence { terms: usize, context: &'static str },
}

impl CevError {
    pub fn domain(field: &'static str, reason: impl Into<String>) -> Self {
        CevError::Domain {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CevError>;
