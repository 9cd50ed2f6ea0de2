use thiserror::Error;

/// Errors raised by the measure, geometry and integration routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("atom space mismatch: {left} atoms vs {right} atoms")]
    SpaceMismatch { left: usize, right: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("measure has a negative weight {weight} at atom {atom}")]
    NegativeMeasure { atom: usize, weight: f64 },

    #[error("non-finite value {value} at position {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("{op} needs at most {limit} atoms, got {got}")]
    TooManyAtoms {
        op: &'static str,
        limit: usize,
        got: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} is outside the family range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("invariant breach: {0}")]
    Invariant(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}
