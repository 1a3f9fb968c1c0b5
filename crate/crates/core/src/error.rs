//! Errors shared by graph construction and checking.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("model has no initial states (init_cond is unsatisfiable)")]
    NoInitialStates,

    #[error("state budget exceeded ({limit} nodes); raise the node budget to continue")]
    NodeBudgetExceeded { limit: usize },

    #[error("product budget exceeded ({limit} nodes); raise the product budget to continue")]
    ProductBudgetExceeded { limit: usize },

    #[error("no specification labelled {label:?}")]
    UnknownSpecLabel { label: String },

    #[error("specification index {index} out of range (model has {count} specifications)")]
    SpecIndexOutOfRange { index: usize, count: usize },

    #[error("reachable graph has {nodes} nodes; the bounded checker is limited to {max}")]
    GraphTooLargeForNaive { nodes: usize, max: usize },

    #[error(
        "formula too large for the bounded checker ({support} tracked subformulas, max {max})"
    )]
    FormulaTooLargeForNaive { support: usize, max: usize },
}
