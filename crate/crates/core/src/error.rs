use thiserror::Error;

/// Errors raised anywhere in the solver and verification pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value is invalid (quadrature order too low, bad key, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// The question cannot be decided from the declared data, e.g. a query
    /// leaves the sampled window and the tails carry no usable declaration.
    #[error("inconclusive: {0}")]
    Inconclusive(String),

    /// Vector or matrix dimensions do not agree.
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    /// A linear solve or factorisation failed.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The boundary law produced a non-finite value.
    #[error("boundary law evaluation failed at u_N = {value}: {reason}")]
    LawWindow { value: f64, reason: String },

    /// The time integration left the finite range.
    #[error("solution diverged at t = {time} (|c| = {norm:e})")]
    Divergence { time: f64, norm: f64 },

    /// An operation was invoked with unusable arguments.
    #[error("usage error: {0}")]
    Usage(String),

    /// A control lies outside the admissible set.
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),

    /// The optimiser could not produce a single finite objective value.
    #[error("optimization failed: {0}")]
    Optimization(String),

    /// A config or data file could not be parsed.
    #[error("parse error in {source_name}: {message}")]
    Parse { source_name: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),

    /// An error raised while running the named check or pipeline stage.
    #[error("{check}: {source}")]
    InCheck { check: String, source: Box<Error> },
}

impl Error {
    pub fn in_check(self, check: impl Into<String>) -> Error {
        Error::InCheck {
            check: check.into(),
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
