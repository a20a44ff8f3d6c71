//! Choosing the query with maximal expected information gain.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::entropy::entropy_bits;
use super::SynthError;
use crate::constraint::{Knowledge, Point};
use crate::counting::{CountError, DistributionCache, ModelCounter, OutcomeDistribution};
use crate::lang::is_valid_query;
use crate::problem::Problem;

pub const DEFAULT_SAMPLE_BUDGET: usize = 20_000;

#[derive(Debug, Clone, Serialize)]
pub struct SelectConfig {
    /// Number of query-box draws per round when the queries are sampled.
    pub sample_budget: usize,
    pub seed: u64,
}

impl Default for SelectConfig {
    fn default() -> Self {
        SelectConfig {
            sample_budget: DEFAULT_SAMPLE_BUDGET,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    Scan,
    Sampled,
}

/// A query together with its outcome distribution and entropy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryScore {
    pub query: Point,
    pub distribution: OutcomeDistribution,
    pub entropy_bits: f64,
}

impl QueryScore {
    pub fn new(distribution: OutcomeDistribution) -> Self {
        QueryScore {
            query: distribution.query.clone(),
            entropy_bits: entropy_bits(&distribution.counts),
            distribution,
        }
    }

    /// Higher entropy wins; equal entropy goes to the smaller query.
    fn beats(&self, other: &QueryScore) -> bool {
        match self.entropy_bits.total_cmp(&other.entropy_bits) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => self.query < other.query,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub best: Option<QueryScore>,
    pub mode: SelectionMode,
    /// Queries whose distribution was computed.
    pub evaluated: usize,
}

fn better(a: Option<QueryScore>, b: Option<QueryScore>) -> Option<QueryScore> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.beats(&a) { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

fn distribution(
    counter: &dyn ModelCounter,
    cache: Option<&DistributionCache>,
    k: &Knowledge,
    q: &[i64],
) -> Result<OutcomeDistribution, CountError> {
    match cache {
        Some(c) => c.get_or_compute(q, || counter.distribution(k, q)),
        None => counter.distribution(k, q),
    }
}

/// Candidate queries for a round: every valid query in scan mode, otherwise
/// a deduplicated accept-reject sample of the query box.
pub fn candidate_queries(
    problem: &Problem,
    asked: &HashSet<Point>,
    config: &SelectConfig,
    round: usize,
) -> Result<(Vec<Point>, SelectionMode), SynthError> {
    if let Some(qs) = problem.queries() {
        let qs = qs.iter().filter(|q| !asked.contains(*q)).cloned().collect();
        return Ok((qs, SelectionMode::Scan));
    }
    let seed = config.seed ^ (round as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bx = problem.spec().query_box();
    let mut picked = BTreeSet::new();
    for _ in 0..config.sample_budget {
        let q: Point = bx
            .iter()
            .map(|iv| rng.random_range(iv.lo..=iv.hi))
            .collect();
        if !asked.contains(&q) && !picked.contains(&q) && is_valid_query(problem.spec(), &q)? {
            picked.insert(q);
        }
    }
    Ok((picked.into_iter().collect(), SelectionMode::Sampled))
}

/// The worthwhile query of maximal entropy among this round's candidates.
pub fn select_query(
    problem: &Problem,
    counter: &dyn ModelCounter,
    k: &Knowledge,
    asked: &HashSet<Point>,
    cache: Option<&DistributionCache>,
    config: &SelectConfig,
    round: usize,
) -> Result<Selection, SynthError> {
    let (queries, mode) = candidate_queries(problem, asked, config, round)?;
    if k.len() <= 1 {
        return Ok(Selection {
            best: None,
            mode,
            evaluated: 0,
        });
    }
    let best = queries
        .par_iter()
        .map(|q| -> Result<Option<QueryScore>, CountError> {
            let d = distribution(counter, cache, k, q)?;
            Ok((d.support() >= 2).then(|| QueryScore::new(d)))
        })
        .try_reduce(|| None, |a, b| Ok(better(a, b)))?;
    Ok(Selection {
        best,
        mode,
        evaluated: queries.len(),
    })
}

/// All worthwhile queries among this round's candidates, in lexicographic
/// order.
pub fn worthwhile_queries(
    problem: &Problem,
    counter: &dyn ModelCounter,
    k: &Knowledge,
    config: &SelectConfig,
) -> Result<Vec<Point>, SynthError> {
    let (queries, _) = candidate_queries(problem, &HashSet::new(), config, 0)?;
    let flags = queries
        .par_iter()
        .map(|q| counter.distribution(k, q).map(|d| d.support() >= 2))
        .collect::<Result<Vec<bool>, CountError>>()?;
    Ok(queries
        .into_iter()
        .zip(flags)
        .filter_map(|(q, w)| w.then_some(q))
        .collect())
}
