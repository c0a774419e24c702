use thiserror::Error;

/// Errors raised by the sampling library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid edge ({u}, {v}) for graph with {n} nodes")]
    InvalidEdge { u: usize, v: usize, n: usize },

    #[error("invalid edge weight {w} on ({u}, {v}); weights must be finite and nonnegative")]
    InvalidWeight { u: usize, v: usize, w: f64 },

    #[error("graph must have at least one node")]
    EmptyGraph,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionError { expected: usize, got: usize },

    #[error("operator is not symmetric (max |M - M^T| = {defect:e})")]
    NotSymmetric { defect: f64 },

    #[error("eigensolver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("band index {k} out of range (1..={available})")]
    BandError { k: usize, available: usize },

    #[error("a full spectrum is required ({available} of {n} eigenpairs available)")]
    InsufficientSpectrum { available: usize, n: usize },

    #[error("node set is empty")]
    EmptySet,

    #[error("rank deficient: rank {rank} < {needed}")]
    RankDeficient { rank: usize, needed: usize },

    #[error("budget {m} exceeds node count {n}")]
    BudgetError { m: usize, n: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("seed set is empty")]
    EmptySeeds,

    #[error("difficulty needs at least two mixture components")]
    NeedsTwoComponents,

    #[error("mixture component {0} has zero weight")]
    DegenerateComponent(usize),

    #[error("sets are not pairwise disjoint")]
    NotDisjoint,

    #[error("the node set has an empty neighborhood")]
    DisconnectedSet,

    #[error("no eigenvalue exceeds the zero threshold {threshold:e}")]
    DegenerateSpectrum { threshold: f64 },

    #[error("Poincare inequality violated: ratio {ratio} exceeds bound {bound}")]
    TheoremViolation { ratio: f64, bound: f64 },

    #[error("signal has nonzero value at node {0} outside the set")]
    InvalidSupport(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
