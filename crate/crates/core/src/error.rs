use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("jet division by near-zero leading coefficient {value:e} at x = {anchor}")]
    DivisionByZeroJet { anchor: f64, value: f64 },
    #[error("jet order exhausted")]
    OrderExhausted,
    #[error("jet order {0} exceeds the supported maximum")]
    OrderTooLarge(usize),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("pole encountered at x = {0}")]
    PoleEncountered(f64),
    #[error("seed incompatible: {0}")]
    SeedIncompatible(String),
    #[error("seed invalid: {0}")]
    SeedInvalid(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("tolerance not met: {0}")]
    ToleranceNotMet(String),
    #[error("out of validity: {0}")]
    OutOfValidity(String),
    #[error("bracket failed: {0}")]
    BracketFailed(String),
    #[error("moment generating function diverged at t = {0}")]
    MgfDiverged(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Param(msg.into())
}
