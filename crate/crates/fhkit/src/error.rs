use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("derivative order {order} exceeds the guard {limit}")]
    OrderTooLarge { order: u32, limit: u32 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("direction is not a unit vector (norm {norm})")]
    NotUnit { norm: f64 },
    #[error("recursion depth k+l = {depth} exceeds the guard {limit}")]
    DepthTooLarge { depth: u32, limit: u32 },
    #[error("argument out of range: {0}")]
    RangeError(String),
    #[error("alias guard failed at G = {grid}: tail mass {tail:e}")]
    AliasGuardFailed { grid: usize, tail: f64 },
    #[error("quadrature did not converge (residual {residual:e})")]
    QuadratureFailed { residual: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
