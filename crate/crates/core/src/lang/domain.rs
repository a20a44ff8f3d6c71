//! Enumeration of the target and query domains.

use rand::Rng;
use thiserror::Error;

use super::interp::{is_valid_query, is_valid_target, EvalError};
use super::spec::{box_size, Interval, SearchSpec};

/// Boxes with more points than this are never enumerated.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("domain box has {size} points, above the enumeration cap of {cap}")]
    Capacity { size: u128, cap: u128 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Lexicographic iterator over the integer points of a box.
#[derive(Debug, Clone)]
pub struct BoxIter {
    bx: Vec<Interval>,
    next: Option<Vec<i64>>,
}

impl BoxIter {
    pub fn new(bx: &[Interval]) -> Self {
        let next = if bx.iter().all(|iv| iv.lo <= iv.hi) {
            Some(bx.iter().map(|iv| iv.lo).collect())
        } else {
            None
        };
        BoxIter {
            bx: bx.to_vec(),
            next,
        }
    }
}

impl Iterator for BoxIter {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for i in (0..succ.len()).rev() {
            if succ[i] < self.bx[i].hi {
                succ[i] += 1;
                self.next = Some(succ);
                return Some(current);
            }
            succ[i] = self.bx[i].lo;
        }
        Some(current)
    }
}

/// All valid targets in lexicographic order.
pub fn enumerate_targets(spec: &SearchSpec, cap: u128) -> Result<Vec<Vec<i64>>, DomainError> {
    let bx = spec.target_box();
    let size = box_size(&bx);
    if size > cap {
        return Err(DomainError::Capacity { size, cap });
    }
    let mut out = Vec::new();
    for t in BoxIter::new(&bx) {
        if is_valid_target(spec, &t)? {
            out.push(t);
        }
    }
    Ok(out)
}

/// All valid queries in lexicographic order.
pub fn enumerate_queries(spec: &SearchSpec, cap: u128) -> Result<Vec<Vec<i64>>, DomainError> {
    let bx = spec.query_box();
    let size = box_size(&bx);
    if size > cap {
        return Err(DomainError::Capacity { size, cap });
    }
    let mut out = Vec::new();
    for q in BoxIter::new(&bx) {
        if is_valid_query(spec, &q)? {
            out.push(q);
        }
    }
    Ok(out)
}

/// Accept-reject sampling of valid queries: uniform draws from the query box,
/// kept when they satisfy `valid_query`. At most `attempts` draws are made.
pub fn sample_valid_queries<R: Rng>(
    spec: &SearchSpec,
    wanted: usize,
    attempts: usize,
    rng: &mut R,
) -> Result<Vec<Vec<i64>>, DomainError> {
    let bx = spec.query_box();
    let mut out = Vec::with_capacity(wanted);
    for _ in 0..attempts {
        if out.len() == wanted {
            break;
        }
        let q: Vec<i64> = bx
            .iter()
            .map(|iv| rng.random_range(iv.lo..=iv.hi))
            .collect();
        if is_valid_query(spec, &q)? {
            out.push(q);
        }
    }
    Ok(out)
}
