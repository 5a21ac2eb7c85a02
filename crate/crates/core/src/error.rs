use thiserror::Error;

use crate::graph::MonotoneViolation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("improper function: every sample is +inf")]
    ImproperFunction,

    #[error("value must not be NaN")]
    NotANumber,

    #[error("fast path requires convex samples (violation at index {index})")]
    NotConvex { index: usize },

    #[error("graph off grid: no point of the operator graph lands on a grid node")]
    GraphOffGrid,

    #[error("graph point {index} is off grid")]
    GraphPointOffGrid { index: usize },

    #[error("empty operator graph")]
    EmptyGraph,

    #[error("duplicate graph point at index {index}")]
    DuplicateGraphPoint { index: usize },

    #[error("operator is not monotone ({} violating pairs)", violations.len())]
    NotMonotone { violations: Vec<MonotoneViolation> },

    #[error("point {0:?} is off grid")]
    PointOffGrid(Vec<f64>),

    #[error("epsilon must be nonnegative, got {0}")]
    NegativeEpsilon(f64),

    #[error("invalid weights p={p}, q={q}: need p, q >= 0 and p + q = 1")]
    InvalidWeights { p: f64, q: f64 },

    #[error("invalid closed-form function: {0}")]
    InvalidFunction(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("iterate {iteration} failed membership in H(T)")]
    MembershipLost { iteration: usize },

    #[error("unknown suite '{name}'; valid suites: {}", valid.join(", "))]
    UnknownSuite { name: String, valid: Vec<String> },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
