//! The search-problem language: lexer, parser, checker, interpreter and printer.

pub mod ast;
mod check;
pub mod domain;
pub mod interp;
mod lexer;
mod parser;
pub mod printer;
pub mod spec;

use thiserror::Error;

pub use ast::{AssignValue, Expr, Stmt};
pub use domain::{
    enumerate_queries, enumerate_targets, sample_valid_queries, BoxIter, DomainError,
    DEFAULT_ENUMERATION_CAP,
};
pub use interp::{
    evaluate_concrete, evaluate_label, is_valid_query, is_valid_target, EvalError, Value,
};
pub use parser::parse_spec;
pub use printer::print_spec;
pub use spec::{box_size, Interval, SearchSpec, VarDecl};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("{line}:{col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{0}")]
    Semantic(String),
}
