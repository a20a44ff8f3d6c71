//! Versioned JSON record of a finished or ongoing session.

use serde::{Deserialize, Serialize};

use crate::constraint::Point;
use crate::synth::{InconsistencyReport, SessionState, SessionStatus};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptConfig {
    pub sample_budget: usize,
    pub seed: u64,
    pub max_rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRound {
    pub round: usize,
    pub query: Point,
    pub counts: Vec<u64>,
    pub entropy_bits: f64,
    pub outcome: String,
    pub candidates_after: usize,
    pub sampled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub symexec_s: f64,
    pub compile_s: f64,
    pub select_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub schema: u32,
    pub spec: String,
    pub outcomes: Vec<String>,
    pub config: TranscriptConfig,
    /// `scan` when every valid query was considered each round.
    pub mode: String,
    pub target: Option<Point>,
    pub rounds: Vec<TranscriptRound>,
    pub status: String,
    pub final_candidates: Vec<Point>,
    pub inconsistency: Option<InconsistencyReport>,
    pub timing: Option<Timing>,
}

impl Transcript {
    /// Snapshot of `state`. `target` is recorded when it is known;
    /// `with_timing` set to false keeps the output byte-deterministic.
    pub fn from_session(state: &SessionState, target: Option<&Point>, with_timing: bool) -> Self {
        let problem = state.problem();
        let spec = problem.spec();
        let rounds = state
            .transcript()
            .iter()
            .map(|r| TranscriptRound {
                round: r.round,
                query: r.query.clone(),
                counts: r.counts.clone(),
                entropy_bits: r.entropy_bits,
                outcome: spec.outcomes[r.outcome].clone(),
                candidates_after: r.candidates_after,
                sampled: r.sampled,
            })
            .collect();
        let status = match state.status() {
            SessionStatus::Running => "running",
            SessionStatus::Converged => "converged",
            SessionStatus::Inconsistent => "inconsistent",
        };
        Transcript {
            schema: SCHEMA_VERSION,
            spec: spec.name.clone(),
            outcomes: spec.outcomes.clone(),
            config: TranscriptConfig {
                sample_budget: state.config().select.sample_budget,
                seed: state.config().select.seed,
                max_rounds: state.max_rounds(),
            },
            mode: if problem.queries().is_some() {
                "scan"
            } else {
                "sampled"
            }
            .to_string(),
            target: target.cloned(),
            rounds,
            status: status.to_string(),
            final_candidates: state.candidates().to_vec(),
            inconsistency: state.inconsistency().cloned(),
            timing: with_timing.then(|| Timing {
                symexec_s: problem.symexec_stats().elapsed.as_secs_f64(),
                compile_s: problem.compile_time().as_secs_f64(),
                select_s: state.select_time().as_secs_f64(),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
