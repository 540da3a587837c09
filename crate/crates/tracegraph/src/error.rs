use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("not a permutation: image {image} repeated at position {position} (1-indexed)")]
    InvalidPermutation { image: usize, position: usize },
    #[error("permutation degrees differ: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("color {color} out of range 1..={d}")]
    ColorOutOfRange { color: usize, d: usize },
    #[error("color set may not be empty here")]
    EmptyColorSet,
    #[error("graph needs at least {needed} colors, has {d}")]
    TooFewColors { d: usize, needed: usize },
    #[error("partition has {blocks} blocks, expected {expected}")]
    BlockCountMismatch { blocks: usize, expected: usize },
    #[error("edge (color {color}, white {white}) is not a 1-dipole")]
    NotAOneDipole { color: usize, white: usize },
    #[error("vertices must have opposite shades")]
    ShadeMismatch,
    #[error("flip edges must share a color: {left} vs {right}")]
    ColorMismatch { left: usize, right: usize },
    #[error("graphs have different color counts: {left} vs {right}")]
    GraphArityMismatch { left: usize, right: usize },
    #[error("vertex index {index} out of range for k={k}")]
    VertexOutOfRange { index: usize, k: usize },
    #[error("search budget exhausted: {0}")]
    BudgetExceeded(String),
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),
    #[error("invalid family spec: {0}")]
    InvalidFamilySpec(String),
    #[error("family predicate failed: {0}")]
    FamilyPredicateFailed(String),
    #[error("invalid tree script at step {step}: {reason}")]
    InvalidScript { step: usize, reason: String },
    #[error("invalid weight function: {0}")]
    InvalidWeights(String),
    #[error("not a reference state: the evaluation system is infeasible")]
    NotAReferenceState,
    #[error("unknown state label: {0}")]
    UnknownState(String),
    #[error("state dimensions inconsistent: {0}")]
    DimensionMismatch(String),
    #[error("dense-state element budget exceeded: {0}")]
    ElementBudgetExceeded(String),
    #[error("value is conjectural in the source and is not emitted as exact")]
    Conjecture,
    #[error("asymptotic conditions not met: {0}")]
    ConditionsNotMet(String),
    #[error("no normalization defined for this family")]
    MissingNormalization,
}

pub type Result<T> = std::result::Result<T, Error>;
