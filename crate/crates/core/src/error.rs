use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A model parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// A covariance matrix failed a physicality or well-posedness requirement.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// An iterative numerical routine did not converge.
    ///
    /// `best_bound` carries the best value found so far when one exists, for
    /// instance a feasible upper bound on an entanglement measure.
    #[error("numerical failure: {message}")]
    NumericalFailure {
        message: String,
        best_bound: Option<f64>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parameter(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn numerical(message: impl Into<String>) -> Self {
        Error::NumericalFailure {
            message: message.into(),
            best_bound: None,
        }
    }
}
