//! Entropy-driven query synthesis.

mod entropy;
mod select;
mod session;
mod worthwhile;

use thiserror::Error;

pub use entropy::{entropy, entropy_bits, entropy_of_probs};
pub use select::{
    candidate_queries, select_query, worthwhile_queries, QueryScore, SelectConfig, Selection,
    SelectionMode, DEFAULT_SAMPLE_BUDGET,
};
pub use session::{
    detect_inconsistency, run_session, InconsistencyReport, Round, SessionConfig, SessionState,
    SessionStatus,
};
pub use worthwhile::{is_worthwhile, is_worthwhile_by_formula};

use crate::constraint::{ConstraintError, Point};
use crate::counting::CountError;
use crate::lang::EvalError;
use crate::oracle::OracleError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("no worthwhile query remains")]
    NoWorthwhileQuery,
    #[error("round limit of {0} reached before convergence")]
    RoundLimitExceeded(usize),
    #[error("session is not running (status {0:?})")]
    NotRunning(SessionStatus),
    #[error("answers are inconsistent: {}", describe(.0))]
    Inconsistent(InconsistencyReport),
    #[error("unknown outcome `{0}`")]
    UnknownOutcome(String),
    #[error("query {0:?} is not valid")]
    InvalidQuery(Point),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

fn describe(r: &InconsistencyReport) -> String {
    match r.round {
        Some(n) => format!(
            "changing round {n} to {} would restore consistency",
            r.alternatives.join(" or ")
        ),
        None => "no single changed answer restores consistency".to_string(),
    }
}
