//! Explicit-state model checking for a multi-agent guarded-command
//! modeling language, with `A`-quantified LTL specifications verified
//! under unconditional fairness.
//!
//! The pipeline: [`parse_model`] produces a syntax-level [`ModelIr`];
//! [`compile()`](compile()) validates it and lowers to a [`CompiledModel`];
//! [`graph::build_graph`] materializes the reachable state graph;
//! [`checker::check`] negates a specification, translates it to a
//! generalized Büchi automaton ([`buchi`]), products it with the graph
//! ([`product`]), and searches for a fair accepting lasso. Refutations are
//! cross-checked by an independent validator, and [`naive::naive_check`]
//! provides a bounded-lasso oracle for differential testing.

pub mod ast;
pub mod buchi;
pub mod bundled;
pub mod checker;
pub mod compile;
pub mod error;
pub mod graph;
pub mod lexer;
pub mod ltl;
pub mod naive;
pub mod parser;
pub mod pretty;
pub mod product;
pub mod scc;
pub mod semantics;
pub mod sim;

pub use ast::{ModelIr, SourceSpan, SpecFormula};
pub use checker::{check, check_by_label, validate_counterexample, LassoTrace, Outcome, Verdict};
pub use compile::{compile, expand_defines, validate_model, CompiledModel, ValidationReport};
pub use error::CheckError;
pub use graph::{build_graph, BuildOptions, StateGraph};
pub use ltl::{eval_on_lasso, normalize, AtomId, AtomSet, LtlNode};
pub use naive::{naive_check, NaiveOutcome};
pub use parser::{parse_formula, parse_model, ParseError};
pub use pretty::pretty_print;
pub use semantics::{
    enabled_actions, eval_expr, exec_statement, initial_states, successors, ActionProfile, State,
};
