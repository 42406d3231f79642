use thiserror::Error;

/// Errors raised by the model, numerics and simulators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The attachment function violates a model requirement (e.g. `f(k) <= 0`).
    #[error("model error: {0}")]
    Model(String),

    /// A table lookup past its horizon. `needed_horizon` is the smallest
    /// horizon that would cover the request, when it could be determined.
    #[error("range error: {what} (needs horizon >= {needed_horizon})")]
    Range { what: String, needed_horizon: usize },

    /// A simulation hit a configured resource cap.
    #[error("resource cap reached: {0}")]
    Resource(String),

    /// A configuration or precondition mismatch (missing constant, wrong regime, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// The model is in a regime where the requested formula does not apply.
    #[error("regime error: {0}")]
    Regime(String),

    /// A numerical procedure failed to converge or lost all precision.
    #[error("numerical error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
