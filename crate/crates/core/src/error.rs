use thiserror::Error;

pub type Result<T> = std::result::Result<T, DoaError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DoaError {
    /// Invalid or inconsistent configuration value.
    #[error("configuration error: {0}")]
    Config(String),
    /// The data model assumptions do not hold (e.g. as many sources as elements).
    #[error("model violation: {0}")]
    ModelViolation(String),
    /// A function precondition was not met by the caller.
    #[error("contract error: {0}")]
    Contract(String),
    /// The input carries no usable structure (e.g. an all-zero cyclic matrix).
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl DoaError {
    /// Errors caused by bad input rather than by the data at hand.
    pub fn is_input_error(&self) -> bool {
        matches!(self, DoaError::Config(_) | DoaError::ModelViolation(_))
    }
}
