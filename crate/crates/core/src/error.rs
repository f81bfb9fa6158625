use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unknown graph family `{0}`")]
    UnknownFamily(String),

    #[error("unknown evolution strategy `{0}`")]
    UnknownEvolver(String),

    #[error("matrix is not symmetric: |h[{row}][{col}] - h[{col}][{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vertex index {index} out of range for a crystal with {k} vertices")]
    VertexOutOfRange { index: usize, k: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what}: got {got}, need at least {need}")]
    InsufficientResolution { what: &'static str, got: usize, need: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("bound violated at t = {t}: {value:e} > {bound:e} ({detail})")]
    BoundViolation {
        t: f64,
        value: f64,
        bound: f64,
        detail: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
