//! Synthesis of adaptive search strategies from programmatic problem
//! specifications.
//!
//! A problem is written in a small imperative language that declares the
//! targets, the queries, the outcomes and an `evaluate` function. Symbolic
//! execution turns `evaluate` into one constraint per outcome. Each round,
//! the query whose outcome distribution over the surviving targets has
//! maximal Shannon entropy is asked, and the answer filters the targets.
//!
//! ```
//! use std::sync::Arc;
//! use searchsynth_core::{run_session, HiddenTarget, Problem, ProblemConfig, SessionConfig};
//!
//! let src = r#"
//! targets t in 1..27
//! queries q[2] in 1..27
//! outcomes "Low", "Middle", "High"
//! evaluate {
//!     if t < q[0] { return "Low" }
//!     else if q[0] <= t && t <= q[1] { return "Middle" }
//!     else { return "High" }
//! }
//! "#;
//! let problem = Arc::new(Problem::from_source("lmh27", src, &ProblemConfig::default()).unwrap());
//! let done = run_session(problem, &mut HiddenTarget::new(vec![5]), &SessionConfig::default()).unwrap();
//! assert_eq!(done.transcript()[0].query, vec![10, 18]);
//! assert_eq!(done.candidates(), &[vec![5]]);
//! ```

pub mod constraint;
pub mod corpus;
pub mod counting;
mod error;
pub mod lang;
pub mod oracle;
pub mod problem;
pub mod symexec;
pub mod synth;
pub mod transcript;

pub use constraint::{Formula, Knowledge, Point, Term, Var};
pub use counting::{ConstraintCounter, InterpreterCounter, ModelCounter, OutcomeDistribution};
pub use error::Error;
pub use lang::{parse_spec, SearchSpec};
pub use oracle::{External, HiddenTarget, Oracle, Replay};
pub use problem::{Problem, ProblemConfig, ProblemError};
pub use symexec::{OutcomeConstraintMap, PathConstraint};
pub use synth::{
    run_session, QueryScore, SelectConfig, SessionConfig, SessionState, SessionStatus, SynthError,
};
