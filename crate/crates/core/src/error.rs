use thiserror::Error;

/// Errors raised by rule construction, evaluation and the study tooling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integrand returned non-finite value {value} at x = {node}")]
    NonFinite { node: f64, value: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("need at least {required} usable rows for a rate fit, got {usable}")]
    InsufficientData { usable: usize, required: usize },

    #[error("missing derivative of order {order} for `{label}` (finite differences not enabled)")]
    MissingDerivative { label: String, order: usize },

    #[error("sweep failed for rule {rule} at n = {n}: {source}")]
    Sweep {
        rule: crate::rule::RuleKind,
        n: usize,
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
