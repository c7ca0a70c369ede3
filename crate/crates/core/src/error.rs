use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the mathematical domain of an operation (non-finite value, bad sign).
    #[error("domain error: {0}")]
    Domain(String),
    /// Invalid physical or numerical configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Fields living on different grids were combined.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// A root finder or bisection failed; carries the last bracket.
    #[error("numeric failure: {msg} (bracket [{lo:e}, {hi:e}])")]
    Bracket { msg: String, lo: f64, hi: f64 },
    /// An iterative method hit its iteration cap.
    #[error("no convergence after {iterations} iterations: {msg}")]
    NoConvergence {
        msg: String,
        iterations: usize,
        trace: Vec<f64>,
    },
    /// A slope/bracket search came up empty.
    #[error("search failed: {msg}")]
    Search { msg: String, log: Vec<String> },
    #[error("invalid N-function: {0}")]
    InvalidNFunction(String),
    #[error("i/o error: {0}")]
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
