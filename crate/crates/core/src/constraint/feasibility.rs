//! Satisfiability of path conditions over the declared domain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::formula::Formula;
use super::term::Var;
use super::Point;
use crate::lang::{box_size, Interval};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    Sat,
    Unsat,
    Unknown,
}

/// The domain a formula is checked against: the valid targets and the query
/// box. `queries_unrestricted` is false when a query validity predicate
/// exists, in which case a satisfying box point is only evidence.
#[derive(Debug, Clone, Copy)]
pub struct DomainView<'a> {
    pub targets: &'a [Point],
    pub query_box: &'a [Interval],
    pub queries_unrestricted: bool,
}

/// Pluggable satisfiability backend used when symbolic execution cannot
/// decide feasibility from its witness sets.
pub trait FeasibilityCheck: Send + Sync {
    fn check(&self, f: &Formula, domain: &DomainView<'_>) -> Feasibility;
}

/// Exact enumeration over the variables a formula mentions, falling back to
/// random sampling when the projected domain is too large.
#[derive(Debug, Clone)]
pub struct EnumerationCheck {
    pub projection_cap: u128,
    pub samples: usize,
    pub seed: u64,
}

impl Default for EnumerationCheck {
    fn default() -> Self {
        EnumerationCheck {
            projection_cap: 1 << 16,
            samples: 512,
            seed: 0,
        }
    }
}

impl EnumerationCheck {
    fn found(&self, uses_query: bool, domain: &DomainView<'_>) -> Feasibility {
        if uses_query && !domain.queries_unrestricted {
            Feasibility::Unknown
        } else {
            Feasibility::Sat
        }
    }
}

impl FeasibilityCheck for EnumerationCheck {
    fn check(&self, f: &Formula, domain: &DomainView<'_>) -> Feasibility {
        let f = f.simplify();
        match f.as_bool() {
            Some(true) if !domain.targets.is_empty() => return Feasibility::Sat,
            Some(_) => return Feasibility::Unsat,
            None => {}
        }
        if domain.targets.is_empty() {
            return Feasibility::Unsat;
        }
        let vars = f.vars();
        let tvars: Vec<usize> = vars
            .iter()
            .filter_map(|v| match v {
                Var::Target(i) => Some(*i),
                Var::Query(_) => None,
            })
            .collect();
        let qvars: Vec<usize> = vars
            .iter()
            .filter_map(|v| match v {
                Var::Query(j) => Some(*j),
                Var::Target(_) => None,
            })
            .collect();
        let tdim = domain.targets[0].len();
        let mut tproj: Vec<Vec<i64>> = domain
            .targets
            .iter()
            .map(|t| {
                tvars
                    .iter()
                    .map(|&i| t.get(i).copied().unwrap_or(0))
                    .collect()
            })
            .collect();
        tproj.sort_unstable();
        tproj.dedup();
        let qbox: Vec<Interval> = qvars
            .iter()
            .map(|&j| {
                domain
                    .query_box
                    .get(j)
                    .copied()
                    .unwrap_or(Interval::new(0, 0))
            })
            .collect();
        let qsize = box_size(&qbox);
        let uses_query = !qvars.is_empty();

        let mut t = vec![0i64; tdim];
        let mut q = vec![0i64; domain.query_box.len()];
        let total = (tproj.len() as u128).saturating_mul(qsize);
        if total <= self.projection_cap {
            for tp in &tproj {
                for (&i, &v) in tvars.iter().zip(tp) {
                    t[i] = v;
                }
                for qp in crate::lang::BoxIter::new(&qbox) {
                    for (&j, &v) in qvars.iter().zip(&qp) {
                        q[j] = v;
                    }
                    if f.eval(&t, &q).unwrap_or(false) {
                        return self.found(uses_query, domain);
                    }
                }
            }
            return Feasibility::Unsat;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.samples {
            let tp = &tproj[rng.random_range(0..tproj.len())];
            for (&i, &v) in tvars.iter().zip(tp) {
                t[i] = v;
            }
            for (&j, iv) in qvars.iter().zip(&qbox) {
                q[j] = rng.random_range(iv.lo..=iv.hi);
            }
            if f.eval(&t, &q).unwrap_or(false) {
                return self.found(uses_query, domain);
            }
        }
        Feasibility::Unknown
    }
}
