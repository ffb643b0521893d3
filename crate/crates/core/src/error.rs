use thiserror::Error;

/// Errors produced anywhere in the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical input is non-positive, non-finite or otherwise outside its domain.
    #[error("invalid parameter `{field}`: {value} ({reason})")]
    Parameter {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// An argument outside the domain of an operation (negative distance, bad grid, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature did not reach its tolerance within the allowed refinement levels.
    #[error("quadrature did not converge: best value {best:e}, error estimate {estimate:e}, tolerance {tolerance:e}")]
    Quadrature {
        best: f64,
        estimate: f64,
        tolerance: f64,
    },

    /// The OAM spectrum carries too much probability outside `[-l_max, l_max]`.
    #[error("OAM spectrum truncated at l_max = {l_max} leaves tail mass {tail:e}; increase l_max")]
    Truncation { l_max: u32, tail: f64 },

    /// A computed quantity violates a structural invariant it must satisfy.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    /// Malformed configuration input.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
