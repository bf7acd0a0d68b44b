//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or out-of-scale model parameters.
    #[error("invalid parameters: {0}")]
    Params(String),

    /// Division by zero in an exact ring.
    #[error("division by zero: {0}")]
    DivisionByZero(String),

    /// An operation would need exponent denominators beyond the declared budget.
    #[error("denominator budget exceeded: {0}")]
    DenominatorBudget(String),

    /// A result left the declared exponent window and no certificate can cover it.
    #[error("window overflow: {0}")]
    WindowOverflow(String),

    /// Input outside the operation's domain (e.g. negative Y-exponents under a Galois action).
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested statement is below the representable precision.
    #[error("precision exhausted: {0}")]
    Precision(String),

    /// A convergence-radius precondition failed.
    #[error("radius violation: {0}")]
    Radius(String),

    /// Inversion of a non-unit was requested.
    #[error("not a unit: {0}")]
    NotUnit(String),

    /// A numeric claim could not be certified within the truncation budget.
    #[error("uncertified: {0}")]
    Uncertified(String),

    /// Text input rejected with a byte position.
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
