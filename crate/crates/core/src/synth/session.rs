//! The adaptive search loop.

use std::collections::HashSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::select::{select_query, QueryScore, SelectConfig, SelectionMode};
use super::SynthError;
use crate::constraint::{ConstraintError, Knowledge, Point};
use crate::counting::{DistributionCache, ModelCounter, OutcomeDistribution};
use crate::lang::is_valid_query;
use crate::oracle::Oracle;
use crate::problem::Problem;

#[derive(Debug, Clone, Default, Serialize)]
pub struct SessionConfig {
    pub select: SelectConfig,
    /// Defaults to ten times the number of targets.
    pub max_rounds: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionStatus {
    Running,
    Converged,
    Inconsistent,
}

/// One answered query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Round {
    pub round: usize,
    pub query: Point,
    pub counts: Vec<u64>,
    pub entropy_bits: f64,
    pub outcome: usize,
    pub candidates_after: usize,
    pub sampled: bool,
}

/// Which single answer, if changed, would make the transcript consistent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InconsistencyReport {
    /// 1-based round number, or `None` if no single change suffices.
    pub round: Option<usize>,
    pub alternatives: Vec<String>,
}

pub struct SessionState {
    problem: Arc<Problem>,
    config: SessionConfig,
    knowledge: Knowledge,
    transcript: Vec<Round>,
    status: SessionStatus,
    pending: Option<QueryScore>,
    pending_mode: SelectionMode,
    asked: HashSet<Point>,
    cache: DistributionCache,
    inconsistency: Option<InconsistencyReport>,
    select_time: Duration,
}

impl std::fmt::Debug for SessionState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SessionState")
            .field("problem", &self.problem.name())
            .field("status", &self.status)
            .field("rounds", &self.transcript.len())
            .field("candidates", &self.knowledge.len())
            .finish()
    }
}

impl SessionState {
    /// Starts a session with full knowledge and selects the first query.
    pub fn new(problem: Arc<Problem>, config: SessionConfig) -> Result<Self, SynthError> {
        let knowledge = problem.initial_knowledge();
        let mut s = SessionState {
            problem,
            config,
            knowledge,
            transcript: Vec::new(),
            status: SessionStatus::Running,
            pending: None,
            pending_mode: SelectionMode::Scan,
            asked: HashSet::new(),
            cache: DistributionCache::new(),
            inconsistency: None,
            select_time: Duration::ZERO,
        };
        s.reselect()?;
        Ok(s)
    }

    pub fn problem(&self) -> &Arc<Problem> {
        &self.problem
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn knowledge(&self) -> &Knowledge {
        &self.knowledge
    }

    pub fn candidates(&self) -> &[Point] {
        self.knowledge.candidates()
    }

    pub fn transcript(&self) -> &[Round] {
        &self.transcript
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    /// The query the session wants answered next.
    pub fn pending(&self) -> Option<&QueryScore> {
        self.pending.as_ref()
    }

    /// Whether the latest selection was made from a sample of the queries.
    pub fn sampled(&self) -> bool {
        self.pending_mode == SelectionMode::Sampled
    }

    pub fn inconsistency(&self) -> Option<&InconsistencyReport> {
        self.inconsistency.as_ref()
    }

    pub fn select_time(&self) -> Duration {
        self.select_time
    }

    pub fn max_rounds(&self) -> usize {
        self.config
            .max_rounds
            .unwrap_or(10 * self.problem.targets().len())
    }

    /// Outcome distribution of `q` under the current knowledge.
    pub fn distribution(&self, q: &[i64]) -> Result<OutcomeDistribution, SynthError> {
        let counter = self.problem.counter();
        Ok(self
            .cache
            .get_or_compute(q, || counter.distribution(&self.knowledge, q))?)
    }

    fn reselect(&mut self) -> Result<(), SynthError> {
        let start = Instant::now();
        let counter = self.problem.counter();
        let sel = select_query(
            &self.problem,
            &counter,
            &self.knowledge,
            &self.asked,
            Some(&self.cache),
            &self.config.select,
            self.transcript.len() + 1,
        )?;
        self.select_time += start.elapsed();
        self.pending_mode = sel.mode;
        self.pending = sel.best;
        if self.pending.is_none() {
            self.status = SessionStatus::Converged;
        }
        Ok(())
    }

    /// Records the answer `outcome` to `query` and selects the next query.
    ///
    /// If no candidate survives, the session becomes `Inconsistent`, keeps
    /// its previous knowledge and returns an error carrying a report.
    pub fn observe(&mut self, query: &[i64], outcome: usize) -> Result<(), SynthError> {
        if self.status != SessionStatus::Running {
            return Err(SynthError::NotRunning(self.status));
        }
        let spec = self.problem.spec();
        if outcome >= spec.outcomes.len() {
            return Err(SynthError::UnknownOutcome(outcome.to_string()));
        }
        if !is_valid_query(spec, query)? {
            return Err(SynthError::InvalidQuery(query.to_vec()));
        }
        let score = match &self.pending {
            Some(p) if p.query == query => p.clone(),
            _ => QueryScore::new(self.distribution(query)?),
        };
        let obs = self.problem.phi().phi(outcome).substitute_query(query);
        let round = self.transcript.len() + 1;
        let mut record = Round {
            round,
            query: query.to_vec(),
            counts: score.distribution.counts.clone(),
            entropy_bits: score.entropy_bits,
            outcome,
            candidates_after: 0,
            sampled: self.pending_mode == SelectionMode::Sampled,
        };
        match self.knowledge.conjoin_and_filter(&obs) {
            Ok(k) => {
                record.candidates_after = k.len();
                self.knowledge = k;
                self.transcript.push(record);
                self.asked.insert(query.to_vec());
                self.cache.clear();
                self.reselect()
            }
            Err(ConstraintError::EmptyKnowledge) => {
                self.transcript.push(record);
                self.status = SessionStatus::Inconsistent;
                self.pending = None;
                let report = detect_inconsistency(&self.problem, &self.answers())?.unwrap_or(
                    InconsistencyReport {
                        round: None,
                        alternatives: Vec::new(),
                    },
                );
                self.inconsistency = Some(report.clone());
                Err(SynthError::Inconsistent(report))
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Observes an answer given by label.
    pub fn observe_label(&mut self, query: &[i64], label: &str) -> Result<(), SynthError> {
        let o = self
            .problem
            .spec()
            .outcome_index(label)
            .ok_or_else(|| SynthError::UnknownOutcome(label.to_string()))?;
        self.observe(query, o)
    }

    /// Asks the oracle about the pending query and records the answer.
    pub fn step(&mut self, oracle: &mut dyn Oracle) -> Result<(), SynthError> {
        if self.status != SessionStatus::Running {
            return Err(SynthError::NotRunning(self.status));
        }
        if self.transcript.len() >= self.max_rounds() {
            return Err(SynthError::RoundLimitExceeded(self.max_rounds()));
        }
        let q = match &self.pending {
            Some(p) => p.query.clone(),
            None => return Err(SynthError::NoWorthwhileQuery),
        };
        let o = oracle.answer(self.problem.spec(), &q)?;
        self.observe(&q, o)
    }

    /// The (query, outcome) pairs answered so far.
    pub fn answers(&self) -> Vec<(Point, usize)> {
        self.transcript
            .iter()
            .map(|r| (r.query.clone(), r.outcome))
            .collect()
    }
}

/// Runs the loop until no worthwhile query remains.
pub fn run_session(
    problem: Arc<Problem>,
    oracle: &mut dyn Oracle,
    config: &SessionConfig,
) -> Result<SessionState, SynthError> {
    let mut s = SessionState::new(problem, config.clone())?;
    while s.status == SessionStatus::Running {
        s.step(oracle)?;
    }
    Ok(s)
}

fn refilter(problem: &Problem, answers: &[(Point, usize)]) -> Result<usize, SynthError> {
    let phi = problem.phi();
    let subs: Vec<_> = answers
        .iter()
        .map(|(q, o)| phi.phi(*o).substitute_query(q))
        .collect();
    let mut n = 0;
    'targets: for t in problem.targets() {
        for f in &subs {
            if !f.eval(t, &[])? {
                continue 'targets;
            }
        }
        n += 1;
    }
    Ok(n)
}

/// Returns `None` when some target is consistent with every answer.
/// Otherwise names the earliest round whose answer, changed to one of the
/// listed alternatives, restores consistency.
pub fn detect_inconsistency(
    problem: &Problem,
    answers: &[(Point, usize)],
) -> Result<Option<InconsistencyReport>, SynthError> {
    if refilter(problem, answers)? > 0 {
        return Ok(None);
    }
    let n = problem.spec().outcomes.len();
    let mut trial = answers.to_vec();
    for (i, (_, o)) in answers.iter().enumerate() {
        let mut alternatives = Vec::new();
        for alt in (0..n).filter(|a| a != o) {
            trial[i].1 = alt;
            if refilter(problem, &trial)? > 0 {
                alternatives.push(problem.outcome_label(alt).to_string());
            }
        }
        trial[i].1 = *o;
        if !alternatives.is_empty() {
            return Ok(Some(InconsistencyReport {
                round: Some(i + 1),
                alternatives,
            }));
        }
    }
    Ok(Some(InconsistencyReport {
        round: None,
        alternatives: Vec::new(),
    }))
}
