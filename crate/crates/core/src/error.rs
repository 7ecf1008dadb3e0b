use thiserror::Error;

/// Errors raised by the laboratory. Every public operation returns `Result<_, Error>`.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid window: N = {n} is smaller than the largest shift {max_shift}")]
    InvalidWindow { n: usize, max_shift: usize },
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),
    #[error("dimension cap exceeded: block of dimension {dim} > cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("insufficient range: {0}")]
    InsufficientRange(String),
    #[error("symbol not invertible at {location}: smallest singular value {min_sv:e}")]
    NonInvertible { location: String, min_sv: f64 },
    #[error("trace-class violation: fiber tail {tail:e} exceeds tolerance {tol:e}")]
    TraceClass { tail: f64, tol: f64 },
    #[error("unsupported dimension d = {d}: {reason}")]
    UnsupportedDimension { d: usize, reason: String },
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, Error>;
