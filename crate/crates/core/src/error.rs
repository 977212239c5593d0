//! Crate error type.

use alloc::boxed::Box;

use crate::simulate::Trajectory;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph has an isolated vertex {0}")]
    IsolatedVertex(usize),
    #[error("vertex index {index} out of range for n = {n}")]
    VertexOutOfRange { index: usize, n: usize },
    #[error("interaction matrix support is bipartite or reducible")]
    BipartiteOrReducible,
    #[error("self-loop precondition violated: {0}")]
    SelfLoopViolation(&'static str),
    #[error("row {row} sums to {sum:e}, not a probability vector")]
    NotStochastic { row: usize, sum: f64 },
    #[error("matrix entry ({row},{col}) = {value:e} outside [0,1]")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },
    #[error("exact mode supports n <= {limit}, got n = {n}")]
    TooLargeForExact { n: usize, limit: usize },
    #[error("iteration did not converge (residual {residual:e})")]
    NonConvergence { residual: f64 },
    #[error("step cap {cap} exceeded before consensus")]
    CapExceeded { cap: u64, partial: Box<Trajectory> },
    #[error("singular linear system")]
    SingularSystem,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("insufficient data: {0}")]
    InsufficientData(&'static str),
    #[error("unsupported initial distribution: {0}")]
    UnsupportedMu(&'static str),
}
