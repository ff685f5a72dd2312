use thiserror::Error;

/// Errors raised anywhere in the pricing stack.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A simulated state left the finite reals.
    #[error("non-finite {quantity} on path {path} at step {step}")]
    NonFinite {
        path: usize,
        step: usize,
        quantity: &'static str,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("mortality fit failed: {0}")]
    Fit(String),

    #[error("at least two samples are required, got {0}")]
    TooFewSamples(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures caused by bad input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::Parse { .. }
                | Error::Validation(_)
                | Error::Config(_)
                | Error::Io { .. }
                | Error::Csv(_)
        )
    }
}
