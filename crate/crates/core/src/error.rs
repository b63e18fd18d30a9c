use thiserror::Error;

/// Errors produced by function evaluation, classification, simulation, and
/// shooting. Numeric payloads are reported as `f64` regardless of the scalar
/// type the computation ran with.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {arg} outside the function domain (0, \u{221e})")]
    OutOfDomain { arg: f64 },

    #[error("invalid function description: {0}")]
    InvalidFunction(String),

    #[error("inverse target {target} is outside the range of the base function")]
    InverseOutOfRange { target: f64 },

    #[error("tail integral diverges: {0}")]
    DivergentTail(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("time step {dt} exceeds the stability bound {max_dt}")]
    DtRejected { dt: f64, max_dt: f64 },

    #[error("solution blew up at t = {time}")]
    BlowupDetected { time: f64 },

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;
