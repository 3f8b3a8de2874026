//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero-dimensional")]
    ZeroDimensional,
    #[error("constraint row {row} is all zeros")]
    ZeroRow { row: usize },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("empty polytope")]
    EmptyPolytope,
    #[error("not full-dimensional")]
    NotFullDimensional,
    #[error("unbounded polytope")]
    Unbounded,
    #[error("unbounded direction")]
    UnboundedDirection,
    #[error("pivot limit")]
    PivotLimit,
    #[error("inconsistent equality system")]
    InconsistentSystem,
    #[error("state drift")]
    StateDrift,
    #[error("walk state not initialized")]
    UninitializedState,
    #[error("flat sample")]
    FlatSample,
    #[error("phase starved at ball index {phase}")]
    PhaseStarved { phase: i64 },
    #[error("generator failed: {0}")]
    Generator(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
