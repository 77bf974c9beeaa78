use thiserror::Error;

use crate::tree::BreakpointId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("duplication choice ({a},{b}) out of range for word of length {len}")]
    IndexOutOfRange { a: usize, b: usize, len: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid evolution at step {step}: {message}")]
    Validation { step: usize, message: String },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("cycle detected in order diagram")]
    CycleDetected,

    #[error("structure violation at node {node}: {message}")]
    StructureViolation { node: BreakpointId, message: String },

    #[error("malformed major graph: {0}")]
    MalformedGraph(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("evolution is not induced from the given parent evolution")]
    NotAnInducedPair,

    #[error("invalid 1-nodeset: {0}")]
    InvalidNodeset(String),

    #[error("invalid beta-subtree: {0}")]
    InvalidSubtree(String),

    #[error("invalid beta-tree: {0}")]
    InvalidBetaTree(String),

    #[error("invalid simulator choice: {0}")]
    InvalidChoice(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
