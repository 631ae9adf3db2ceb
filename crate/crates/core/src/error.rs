use thiserror::Error;

use crate::constraints::Certificate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("propositions or distributions belong to different frames")]
    FrameMismatch,

    #[error("mass assigned to the empty set")]
    EmptySetMass,

    #[error("negative mass {0}")]
    NegativeMass(f64),

    #[error("mass {0} is not a finite number")]
    NonFiniteMass(f64),

    #[error("masses sum to {0}, expected 1")]
    MassSumViolation(f64),

    #[error("focal set {0} listed more than once")]
    DuplicateFocal(String),

    #[error("total mass is zero")]
    ZeroTotalMass,

    #[error("invalid compatibility relation: {0}")]
    InvalidRelation(String),

    #[error("invalid probability function: {0}")]
    InvalidProbability(String),

    #[error("inconsistent conditional: {0}")]
    InconsistentConditional(String),

    #[error("incomplete conditionals: {0}")]
    IncompleteConditionals(String),

    #[error("unknown abstract element `{0}`")]
    UnknownElement(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("constraint system is infeasible")]
    NotFeasible,

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("instance too large for the oracle: {free_cells} free cells (limit {limit})")]
    TooLarge { free_cells: usize, limit: usize },

    #[error("no evidence to combine")]
    NoEvidence,

    #[error("total conflict: every pair of focal elements is disjoint")]
    TotalConflict,

    #[error("conflict detected: {0}")]
    ConflictDetected(Box<Certificate>),
}
