use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical method could not reach the requested accuracy.
    #[error("accuracy error: {message} (achieved {achieved:e})")]
    Accuracy { message: String, achieved: f64 },

    /// The grid does not resolve the requested object.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Exponent or model parameters violate a structural inequality.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Mismatched array lengths or grids.
    #[error("shape error: {0}")]
    Shape(String),

    /// Fixed-point iteration did not converge.
    #[error("no convergence after {iterations} iterations; increment ratios {ratios:?}")]
    NonConvergence { iterations: usize, ratios: Vec<f64> },

    #[error("io error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
