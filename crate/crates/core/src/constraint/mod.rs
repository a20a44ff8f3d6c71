//! Quantifier-free integer constraints over target and query coordinates.

mod feasibility;
mod formula;
mod knowledge;
mod sexpr;
mod term;

use thiserror::Error;

pub use feasibility::{DomainView, EnumerationCheck, Feasibility, FeasibilityCheck};
pub use formula::Formula;
pub use knowledge::{is_satisfiable_over, target_box_formula, Knowledge};
pub use sexpr::parse_formula;
pub use term::{Term, Var};

/// A target or query vector.
pub type Point = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("variable {0} has no value")]
    UnboundVariable(Var),
    #[error("integer overflow")]
    Overflow,
    #[error("no candidate target is consistent with the observations")]
    EmptyKnowledge,
    #[error("malformed formula: {0}")]
    Syntax(String),
}
