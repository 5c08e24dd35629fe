use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("root not bracketed on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NotBracketed {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("quadrature did not converge: estimate {estimate}, error bound {error} after {intervals} intervals")]
    Quadrature {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("near-degenerate ground space (gap {gap:e}); overlaps are not trustworthy")]
    NearDegenerate { gap: f64 },

    #[error("every one of the {0} drawn samples was rejected")]
    AllRejected(usize),

    #[error("coupling realization with non-positive entry {value} at site {site}")]
    NonPositiveCoupling { site: usize, value: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for errors caused by the caller's configuration rather than by
    /// the numerics.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_) | Error::DimensionMismatch { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
