use thiserror::Error;

use crate::series::Caps;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("caps mismatch: {left} vs {right}")]
    CapsMismatch { left: Caps, right: Caps },
    #[error("series has zero constant term and is not invertible")]
    NotInvertible,
    #[error("exp is only defined here for series with zero constant term")]
    ExpDomain,
    #[error("sqrt requires constant term 1")]
    SqrtDomain,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("malformed token `{0}`")]
    MalformedToken(String),
    #[error("crossing {0} must appear exactly twice, once over and once under")]
    CrossingCountMismatch(u32),
    #[error("expected {expected} crossing signs, found {found}")]
    SignCountMismatch { expected: usize, found: usize },
    #[error("label {0} used more than once")]
    DuplicateLabel(u32),
    #[error("label {0} is never used")]
    MissingLabel(u32),
    #[error("label {label} outside 1..={labels}")]
    LabelOutOfRange { label: u32, labels: u32 },
    #[error("arc {arc} out of range for a code with {gaps} gaps")]
    ArcOutOfRange { arc: usize, gaps: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantError {
    #[error(transparent)]
    InvalidDecomposition(#[from] DiagramError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("epsilon degree {k} outside 0..={max}")]
    DegreeOutOfRange { k: u32, max: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RtError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not invertible over the truncated series ring")]
    Singular,
    #[error("invalid representation data: {0}")]
    Format(String),
}

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("curve needs at least two points, found {0}")]
    TooFewPoints(usize),
    #[error("points {0} and {1} coincide")]
    DuplicateConsecutivePoint(usize, usize),
    #[error("line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("every sampled direction was degenerate")]
    AllSamplesDegenerate,
    #[error("estimate has no accepted samples")]
    EmptyEstimate,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
}
