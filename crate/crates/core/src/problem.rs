//! A specification compiled once: domains enumerated and constraints derived.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::constraint::{Knowledge, Point};
use crate::counting::ConstraintCounter;
use crate::lang::{
    box_size, enumerate_queries, enumerate_targets, DomainError, LangError, SearchSpec,
    DEFAULT_ENUMERATION_CAP,
};
use crate::symexec::{
    symbolic_execute_with, OutcomeConstraintMap, PathConstraint, SymexecConfig, SymexecError,
    SymexecStats,
};

/// Query boxes up to this size are scanned exhaustively.
pub const DEFAULT_SCAN_CAP: u128 = 250_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Symexec(#[from] SymexecError),
    #[error("the specification admits no valid target")]
    NoTargets,
}

#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub enumeration_cap: u128,
    pub scan_cap: u128,
    pub symexec: SymexecConfig,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig {
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            scan_cap: DEFAULT_SCAN_CAP,
            symexec: SymexecConfig::default(),
        }
    }
}

#[derive(Debug)]
pub struct Problem {
    spec: SearchSpec,
    targets: Vec<Point>,
    queries: Option<Vec<Point>>,
    paths: Vec<PathConstraint>,
    phi: OutcomeConstraintMap,
    symexec: SymexecStats,
    compile_time: Duration,
}

impl Problem {
    /// Enumerates the valid targets, enumerates the valid queries when the
    /// query box is within the scan cap, and runs symbolic execution.
    pub fn compile(spec: SearchSpec, config: &ProblemConfig) -> Result<Problem, ProblemError> {
        let start = Instant::now();
        let targets = enumerate_targets(&spec, config.enumeration_cap)?;
        if targets.is_empty() {
            return Err(ProblemError::NoTargets);
        }
        let queries = if box_size(&spec.query_box()) <= config.scan_cap {
            Some(enumerate_queries(&spec, config.scan_cap)?)
        } else {
            None
        };
        let out = match &queries {
            Some(qs) => {
                let backend = crate::constraint::EnumerationCheck {
                    seed: config.symexec.seed,
                    ..Default::default()
                };
                symbolic_execute_with(&spec, &targets, qs, true, &config.symexec, &backend)?
            }
            None => crate::symexec::symbolic_execute(&spec, &targets, &config.symexec)?,
        };
        Ok(Problem {
            spec,
            targets,
            queries,
            paths: out.paths,
            phi: out.phi,
            symexec: out.stats,
            compile_time: start.elapsed(),
        })
    }

    pub fn from_source(
        name: &str,
        source: &str,
        config: &ProblemConfig,
    ) -> Result<Problem, ProblemError> {
        Problem::compile(crate::lang::parse_spec(name, source)?, config)
    }

    pub fn spec(&self) -> &SearchSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    /// Valid targets in lexicographic order.
    pub fn targets(&self) -> &[Point] {
        &self.targets
    }

    /// Valid queries in lexicographic order, when the query box was small
    /// enough to enumerate.
    pub fn queries(&self) -> Option<&[Point]> {
        self.queries.as_deref()
    }

    /// Number of points in the query box (an upper bound on |Q|).
    pub fn query_box_size(&self) -> u128 {
        box_size(&self.spec.query_box())
    }

    pub fn paths(&self) -> &[PathConstraint] {
        &self.paths
    }

    pub fn phi(&self) -> &OutcomeConstraintMap {
        &self.phi
    }

    pub fn symexec_stats(&self) -> &SymexecStats {
        &self.symexec
    }

    pub fn compile_time(&self) -> Duration {
        self.compile_time
    }

    pub fn counter(&self) -> ConstraintCounter<'_> {
        ConstraintCounter { phi: &self.phi }
    }

    pub fn initial_knowledge(&self) -> Knowledge {
        Knowledge::initial(&self.spec.target_box(), self.targets.clone())
    }

    pub fn outcome_label(&self, outcome: usize) -> &str {
        &self.spec.outcomes[outcome]
    }
}
