//! Answer sources for the search loop.

use std::collections::VecDeque;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use crate::constraint::Point;
use crate::lang::{evaluate_concrete, EvalError, SearchSpec};

/// Idle limit for a human answering through [`External`].
pub const DEFAULT_EXTERNAL_TIMEOUT: Duration = Duration::from_secs(600);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("\"{0}\" is not a declared outcome")]
    InvalidOutcome(String),
    #[error("no answer within {0:?}")]
    Timeout(Duration),
    #[error("replay has no answers left")]
    Exhausted,
    #[error("the answering side has gone away")]
    Disconnected,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("malformed transcript: {0}")]
    Transcript(String),
}

pub trait Oracle {
    /// The outcome index for `query`.
    fn answer(&mut self, spec: &SearchSpec, query: &[i64]) -> Result<usize, OracleError>;
}

fn label_index(spec: &SearchSpec, label: &str) -> Result<usize, OracleError> {
    spec.outcome_index(label)
        .ok_or_else(|| OracleError::InvalidOutcome(label.to_string()))
}

/// Simulates a player holding a known target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HiddenTarget {
    pub target: Point,
}

impl HiddenTarget {
    pub fn new(target: Point) -> Self {
        HiddenTarget { target }
    }
}

impl Oracle for HiddenTarget {
    fn answer(&mut self, spec: &SearchSpec, query: &[i64]) -> Result<usize, OracleError> {
        Ok(evaluate_concrete(spec, query, &self.target)?)
    }
}

/// Replays a fixed list of outcome labels, ignoring the queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replay {
    answers: VecDeque<String>,
}

#[derive(Deserialize)]
struct TranscriptAnswers {
    rounds: Vec<RoundAnswer>,
}

#[derive(Deserialize)]
struct RoundAnswer {
    outcome: String,
}

impl Replay {
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Replay {
            answers: labels.into_iter().map(Into::into).collect(),
        }
    }

    /// Reads the outcome labels of every round of a transcript document.
    pub fn from_transcript_json(text: &str) -> Result<Self, OracleError> {
        let doc: TranscriptAnswers =
            serde_json::from_str(text).map_err(|e| OracleError::Transcript(e.to_string()))?;
        Ok(Replay::new(doc.rounds.into_iter().map(|r| r.outcome)))
    }

    pub fn remaining(&self) -> usize {
        self.answers.len()
    }
}

impl Oracle for Replay {
    fn answer(&mut self, spec: &SearchSpec, _query: &[i64]) -> Result<usize, OracleError> {
        let label = self.answers.pop_front().ok_or(OracleError::Exhausted)?;
        label_index(spec, &label)
    }
}

/// An oracle answered from another thread, typically a human behind some
/// front end. Each query is sent out and one label is awaited.
#[derive(Debug)]
pub struct External {
    queries: Sender<Point>,
    answers: Receiver<String>,
    timeout: Duration,
}

/// The answering side of an [`External`] oracle.
#[derive(Debug)]
pub struct ExternalHandle {
    pub queries: Receiver<Point>,
    pub answers: Sender<String>,
}

impl External {
    pub fn channel(timeout: Duration) -> (External, ExternalHandle) {
        let (qtx, qrx) = mpsc::channel();
        let (atx, arx) = mpsc::channel();
        (
            External {
                queries: qtx,
                answers: arx,
                timeout,
            },
            ExternalHandle {
                queries: qrx,
                answers: atx,
            },
        )
    }
}

impl Oracle for External {
    fn answer(&mut self, spec: &SearchSpec, query: &[i64]) -> Result<usize, OracleError> {
        self.queries
            .send(query.to_vec())
            .map_err(|_| OracleError::Disconnected)?;
        let label = self
            .answers
            .recv_timeout(self.timeout)
            .map_err(|e| match e {
                RecvTimeoutError::Timeout => OracleError::Timeout(self.timeout),
                RecvTimeoutError::Disconnected => OracleError::Disconnected,
            })?;
        label_index(spec, &label)
    }
}
