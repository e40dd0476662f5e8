use alloc::string::String;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NonHermitian { deviation: f64 },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("partial trace must keep at least one subsystem")]
    EmptyKeep,
    #[error("not a valid state: {0}")]
    NotAState(String),
    #[error("rank {rank} is invalid for dimension {dim}")]
    BadRank { rank: usize, dim: usize },
    #[error("state is not bipartite (has {0} subsystems)")]
    NotBipartite(usize),
    #[error("invalid information type: {0}")]
    BadInfoType(String),
    #[error("grouping is not a partition of the projector indices: {0}")]
    BadPartition(String),
    #[error("information type is not an orthonormal basis (projector {0} has rank != 1)")]
    NotRankOne(usize),
    #[error("reduced state is inconsistent with the decomposition (deviation {0:.3e})")]
    InconsistentMarginal(f64),
    #[error("solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("state is not pure (largest eigenvalue {top_eigenvalue})")]
    NotPure { top_eigenvalue: f64 },
    #[error("channel is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("hashing distance parameter {0} outside (0, 1/2]")]
    BadDelta(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
