use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes shared by every solver in the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input violates a precondition (non-positive mass, empty range, ...).
    Domain(String),
    /// A bracketing search found nothing to bracket.
    Search(String),
    /// A local fit was attempted on a window where it is not meaningful.
    Fit(String),
    /// An iteration ran out of steps.
    Convergence { iterations: usize, residual: f64 },
    /// An iteration converged, but to a root outside the seed's basin.
    Basin { seed: f64, found: f64 },
    /// A numerical result is known to be inaccurate; `estimate` is the achieved error.
    Accuracy { what: String, estimate: f64 },
    /// Two independent evaluation paths disagree.
    Consistency { what: String, deviation: f64 },
    /// A run configuration is invalid.
    Config(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn accuracy(what: impl Into<String>, estimate: f64) -> Self {
        Error::Accuracy { what: what.into(), estimate }
    }

    /// Input errors are the caller's fault; everything else is a numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Config(_))
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Search(msg) => write!(f, "search error: {msg}"),
            Error::Fit(msg) => write!(f, "fit error: {msg}"),
            Error::Convergence { iterations, residual } => write!(
                f,
                "no convergence after {iterations} iterations (residual {residual:e})"
            ),
            Error::Basin { seed, found } => write!(
                f,
                "converged outside the seed basin (seed k = {seed}, found k = {found})"
            ),
            Error::Accuracy { what, estimate } => {
                write!(f, "accuracy error: {what} (estimate {estimate:e})")
            }
            Error::Consistency { what, deviation } => {
                write!(f, "consistency error: {what} (deviation {deviation:e})")
            }
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
