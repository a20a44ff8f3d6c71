use thiserror::Error;

use crate::constraint::ConstraintError;
use crate::corpus::CorpusError;
use crate::counting::CountError;
use crate::lang::{DomainError, EvalError, LangError};
use crate::oracle::OracleError;
use crate::problem::ProblemError;
use crate::symexec::SymexecError;
use crate::synth::SynthError;

/// Any error raised by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Symexec(#[from] SymexecError),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}
