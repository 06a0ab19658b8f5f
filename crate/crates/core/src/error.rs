use thiserror::Error;

/// Errors produced by the simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Input lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Malformed or non-finite input data.
    #[error("invalid data: {0}")]
    InvalidData(String),
    /// A numerical procedure failed to converge.
    #[error("numerical failure: {0}")]
    Numerics(String),
    /// The requested time window clips a non-negligible part of the pulse.
    #[error("window truncates pulse: missing norm {missing_norm:.3e}")]
    WindowTruncation { missing_norm: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
