use thiserror::Error;

use crate::rules::Label;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("label {index} out of range for {size} colours")]
    InvalidLabel { index: usize, size: usize },

    #[error("module V_{{{a}{b}}}^{{{c}}} is zero-dimensional")]
    EmptyModule { a: Label, b: Label, c: Label },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    Shape {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("non-finite scalar in {0}")]
    NonFinite(String),

    #[error("block {labels:?}: {reason}")]
    Block { labels: [Label; 6], reason: String },

    #[error("cannot contract slots {primal} and {dual}: {reason}")]
    ContractionPair {
        primal: usize,
        dual: usize,
        reason: String,
    },

    #[error("weight for label {0} is zero")]
    ZeroWeight(Label),

    #[error("missing weight for label {0}")]
    MissingWeight(Label),

    #[error("not a group: {0}")]
    InvalidGroup(String),

    #[error("3-cocycle identity fails at {at:?} (deviation {deviation:e})")]
    InvalidCocycle { at: [usize; 4], deviation: f64 },

    #[error("associator block for (c,b,a,d) = {at:?} is singular")]
    SingularAssociator { at: [Label; 4] },

    #[error("{0}")]
    Unsupported(String),

    #[error("order {0} outside the supported range 1..=12")]
    OrderOutOfRange(usize),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid document: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
