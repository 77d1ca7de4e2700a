//! Error type shared by the model evaluators and solvers.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An evaluation point lies outside a model's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A model parameter violates its constraints.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// The efficacy function has no usable slope where a solver needs the
    /// planning/execution coupling.
    #[error("degenerate efficacy: {0}")]
    DegenerateEfficacy(String),
    /// Adaptive bracket expansion failed to enclose an optimum.
    #[error("bracket error: {0}")]
    Bracket(String),
    /// A random draw produced an invalid problem instance.
    #[error("sampling error: {0}")]
    Sampling(String),
    /// A run configuration failed validation. `field` names the offending
    /// configuration entry.
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for configuration-validation failures, as opposed to numerical
    /// or solver failures.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}
