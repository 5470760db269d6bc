use thiserror::Error;

use crate::form::Signature;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed diagram text or an out-of-range diagram entry.
    #[error("invalid diagram (line {line}): {msg}")]
    Diagram { line: usize, msg: String },

    #[error("invalid Gram matrix: {0}")]
    Gram(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("form is not Lorentzian: signature {0}")]
    NotLorentzian(Signature),

    #[error("reflection vector is not unit: q = {q}")]
    NonUnitRoot { q: f64 },

    #[error("vector is not transverse to the affine chart: last coordinate {last}")]
    NonTransverse { last: f64 },

    #[error("vector is not time-like: q = {q}")]
    NotTimeLike { q: f64 },

    #[error("point outside the closed unit ball: norm {norm}")]
    OutsideBall { norm: f64 },

    #[error("element budget of {budget} exhausted")]
    Budget { budget: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("polytope has empty interior (dimension {dim})")]
    DegeneratePolytope { dim: usize },

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Coarse failure class, used for process exit codes.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Budget { .. } => ErrorClass::Budget,
            Error::Numeric(_) | Error::NonTransverse { .. } | Error::DegeneratePolytope { .. } => {
                ErrorClass::Numeric
            }
            _ => ErrorClass::Input,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Numeric,
    Budget,
}
