use thiserror::Error;

use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("component {index} is negative ({value})")]
    NegativeComponent { index: usize, value: String },

    #[error("vector must have at least one component")]
    EmptyVector,

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("total masses differ: {left} vs {right}")]
    MassMismatch { left: String, right: String },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn mass_mismatch(left: &Rational, right: &Rational) -> Self {
        Error::MassMismatch {
            left: format_rational(left),
            right: format_rational(right),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
