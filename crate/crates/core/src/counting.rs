//! Model counting: how many candidate targets each outcome keeps for a query.

use dashmap::DashMap;
use serde::Serialize;
use thiserror::Error;

use crate::constraint::{ConstraintError, Formula, Knowledge, Point};
use crate::lang::{evaluate_concrete, EvalError, SearchSpec};
use crate::symexec::OutcomeConstraintMap;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error("no outcome constraint holds for target {target:?} under query {query:?}")]
    PartitionViolation { query: Point, target: Point },
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Per-outcome candidate counts for one query.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct OutcomeDistribution {
    pub query: Point,
    pub counts: Vec<u64>,
}

impl OutcomeDistribution {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn probs(&self) -> Vec<f64> {
        let n = self.total();
        if n == 0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts.iter().map(|&c| c as f64 / n as f64).collect()
    }

    /// Number of outcomes with a nonzero count.
    pub fn support(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// Counts candidates in `k` satisfying `phi` once the query is fixed.
pub fn count_models(phi: &Formula, k: &Knowledge, q: &[i64]) -> Result<u64, CountError> {
    let g = phi.substitute_query(q);
    if let Some(b) = g.as_bool() {
        return Ok(if b { k.len() as u64 } else { 0 });
    }
    let mut n = 0;
    for t in k.candidates() {
        if g.eval(t, q)? {
            n += 1;
        }
    }
    Ok(n)
}

/// The same count obtained by running the interpreter on every candidate and
/// tallying the ones that produce `outcome`.
pub fn count_models_by_interpretation(
    spec: &SearchSpec,
    outcome: usize,
    k: &Knowledge,
    q: &[i64],
) -> Result<u64, CountError> {
    let mut n = 0;
    for t in k.candidates() {
        if evaluate_concrete(spec, q, t)? == outcome {
            n += 1;
        }
    }
    Ok(n)
}

/// A backend producing outcome distributions.
pub trait ModelCounter: Send + Sync {
    fn distribution(&self, k: &Knowledge, q: &[i64]) -> Result<OutcomeDistribution, CountError>;
}

/// Counts with the outcome constraints produced by symbolic execution.
#[derive(Debug, Clone, Copy)]
pub struct ConstraintCounter<'a> {
    pub phi: &'a OutcomeConstraintMap,
}

impl ModelCounter for ConstraintCounter<'_> {
    fn distribution(&self, k: &Knowledge, q: &[i64]) -> Result<OutcomeDistribution, CountError> {
        let subs = self.phi.substitute_query(q);
        let mut counts = vec![0u64; subs.len()];
        // A formula folded to a constant decides every candidate at once.
        if let Some(o) = subs.iter().position(|f| *f == Formula::True) {
            if subs[..o].iter().all(|f| *f == Formula::False) {
                counts[o] = k.len() as u64;
                return Ok(OutcomeDistribution {
                    query: q.to_vec(),
                    counts,
                });
            }
        }
        'targets: for t in k.candidates() {
            for (o, f) in subs.iter().enumerate() {
                if f.eval(t, q)? {
                    counts[o] += 1;
                    continue 'targets;
                }
            }
            return Err(CountError::PartitionViolation {
                query: q.to_vec(),
                target: t.clone(),
            });
        }
        Ok(OutcomeDistribution {
            query: q.to_vec(),
            counts,
        })
    }
}

/// Counts by concrete interpretation of `evaluate`.
#[derive(Debug, Clone, Copy)]
pub struct InterpreterCounter<'a> {
    pub spec: &'a SearchSpec,
}

impl ModelCounter for InterpreterCounter<'_> {
    fn distribution(&self, k: &Knowledge, q: &[i64]) -> Result<OutcomeDistribution, CountError> {
        let mut counts = vec![0u64; self.spec.outcomes.len()];
        for t in k.candidates() {
            counts[evaluate_concrete(self.spec, q, t)?] += 1;
        }
        Ok(OutcomeDistribution {
            query: q.to_vec(),
            counts,
        })
    }
}

/// Distributions memoized by query for one fixed knowledge state. Must be
/// cleared whenever the knowledge changes.
#[derive(Debug, Default)]
pub struct DistributionCache {
    map: DashMap<Point, OutcomeDistribution>,
}

impl DistributionCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_compute(
        &self,
        q: &[i64],
        compute: impl FnOnce() -> Result<OutcomeDistribution, CountError>,
    ) -> Result<OutcomeDistribution, CountError> {
        if let Some(d) = self.map.get(q) {
            return Ok(d.clone());
        }
        let d = compute()?;
        self.map.insert(q.to_vec(), d.clone());
        Ok(d)
    }

    pub fn clear(&self) {
        self.map.clear();
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{enumerate_targets, parse_spec, Interval};
    use crate::symexec::{symbolic_execute, SymexecConfig};

    const LMH: &str = r#"
targets t in 1..27
queries q[2] in 1..27
outcomes "Low", "Middle", "High"
evaluate {
    if t < q[0] { return "Low" }
    else if q[0] <= t && t <= q[1] { return "Middle" }
    else { return "High" }
}
"#;

    fn setup() -> (SearchSpec, Knowledge, OutcomeConstraintMap) {
        let spec = parse_spec("lmh27", LMH).unwrap();
        let targets = enumerate_targets(&spec, 1000).unwrap();
        let out = symbolic_execute(&spec, &targets, &SymexecConfig::default()).unwrap();
        let k = Knowledge::initial(&[Interval::new(1, 27)], targets);
        (spec, k, out.phi)
    }

    #[test]
    fn counts_for_low_middle_high() {
        let (spec, k, phi) = setup();
        assert_eq!(count_models(phi.phi(0), &k, &[5, 20]).unwrap(), 4);
        assert_eq!(count_models(phi.phi(0), &k, &[30, 35]).unwrap(), 27);
        assert_eq!(count_models(phi.phi(1), &k, &[10, 18]).unwrap(), 9);
        assert_eq!(
            count_models_by_interpretation(&spec, 0, &k, &[5, 20]).unwrap(),
            4
        );
        let d = ConstraintCounter { phi: &phi }
            .distribution(&k, &[10, 18])
            .unwrap();
        assert_eq!(d.counts, vec![9, 9, 9]);
        assert_eq!(
            d,
            InterpreterCounter { spec: &spec }
                .distribution(&k, &[10, 18])
                .unwrap()
        );
    }

    #[test]
    fn useless_query_on_narrow_knowledge() {
        let (_, _, phi) = setup();
        let k = Knowledge::new(Formula::True, (10..=18).map(|v| vec![v]).collect());
        let d = ConstraintCounter { phi: &phi }
            .distribution(&k, &[3, 7])
            .unwrap();
        assert_eq!(d.counts, vec![0, 0, 9]);
        assert_eq!(d.support(), 1);
    }

    #[test]
    fn singleton_knowledge_is_concentrated() {
        let (_, _, phi) = setup();
        let k = Knowledge::new(Formula::True, vec![vec![5]]);
        let d = ConstraintCounter { phi: &phi }
            .distribution(&k, &[2, 9])
            .unwrap();
        assert_eq!(d.probs(), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn cache_memoizes() {
        let cache = DistributionCache::new();
        let mut calls = 0;
        for _ in 0..3 {
            cache
                .get_or_compute(&[1, 2], || {
                    calls += 1;
                    Ok(OutcomeDistribution {
                        query: vec![1, 2],
                        counts: vec![1],
                    })
                })
                .unwrap();
        }
        assert_eq!(calls, 1);
        cache.clear();
        assert!(cache.is_empty());
    }
}
