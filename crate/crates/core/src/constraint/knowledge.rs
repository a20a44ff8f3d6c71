use serde::Serialize;

use super::formula::Formula;
use super::term::Term;
use super::{ConstraintError, Point};
use crate::lang::Interval;

/// What is known about the hidden target: a formula over target variables
/// together with the materialized set of candidates satisfying it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Knowledge {
    formula: Formula,
    candidates: Vec<Point>,
}

/// Conjunction of `lo <= t_i <= hi` for every coordinate of the box.
pub fn target_box_formula(bx: &[Interval]) -> Formula {
    let mut parts = Vec::with_capacity(2 * bx.len());
    for (i, iv) in bx.iter().enumerate() {
        parts.push(Formula::le(Term::Const(iv.lo), Term::target(i)));
        parts.push(Formula::le(Term::target(i), Term::Const(iv.hi)));
    }
    Formula::and(parts).simplify()
}

impl Knowledge {
    /// `candidates` must be exactly the targets satisfying `formula`.
    pub fn new(formula: Formula, candidates: Vec<Point>) -> Self {
        Knowledge {
            formula,
            candidates,
        }
    }

    /// Initial knowledge: the declared box, with `targets` being the valid
    /// targets inside it.
    pub fn initial(bx: &[Interval], targets: Vec<Point>) -> Self {
        Knowledge::new(target_box_formula(bx), targets)
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn candidates(&self) -> &[Point] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Conjoins an observation over target variables and drops the
    /// candidates it rules out.
    pub fn conjoin_and_filter(&self, obs: &Formula) -> Result<Knowledge, ConstraintError> {
        let obs = obs.simplify();
        if obs == Formula::True {
            return Ok(self.clone());
        }
        let mut kept = Vec::new();
        for t in &self.candidates {
            if obs.eval(t, &[])? {
                kept.push(t.clone());
            }
        }
        if kept.is_empty() {
            return Err(ConstraintError::EmptyKnowledge);
        }
        Ok(Knowledge {
            formula: Formula::and(vec![self.formula.clone(), obs]).simplify(),
            candidates: kept,
        })
    }
}

/// True iff some candidate satisfies `f` once the query is fixed to `q`.
pub fn is_satisfiable_over(
    f: &Formula,
    candidates: &[Point],
    q: &[i64],
) -> Result<bool, ConstraintError> {
    let g = f.substitute_query(q);
    if let Some(b) = g.as_bool() {
        return Ok(b && !candidates.is_empty());
    }
    for t in candidates {
        if g.eval(t, q)? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lmh() -> (Formula, Formula, Formula) {
        let low = Formula::less(Term::target(0), Term::query(0));
        let mid = Formula::and(vec![
            Formula::le(Term::query(0), Term::target(0)),
            Formula::le(Term::target(0), Term::query(1)),
        ]);
        let high = Formula::and(vec![low.clone().negate(), mid.clone().negate()]);
        (low, mid, high)
    }

    fn range(lo: i64, hi: i64) -> Vec<Point> {
        (lo..=hi).map(|v| vec![v]).collect()
    }

    #[test]
    fn filter_after_low() {
        let k = Knowledge::initial(&[Interval::new(1, 27)], range(1, 27));
        assert_eq!(k.formula().to_string(), "(and (le 1 t0) (le t0 27))");
        let (low, _, _) = lmh();
        let k2 = k
            .conjoin_and_filter(&low.substitute_query(&[10, 18]))
            .unwrap();
        assert_eq!(k2.candidates(), range(1, 9).as_slice());
        assert_eq!(k.conjoin_and_filter(&Formula::True).unwrap(), k);
    }

    #[test]
    fn empty_intersection() {
        let k = Knowledge::new(Formula::True, range(10, 18));
        let (low, _, _) = lmh();
        assert_eq!(
            k.conjoin_and_filter(&low.substitute_query(&[10, 18])),
            Err(ConstraintError::EmptyKnowledge)
        );
    }

    #[test]
    fn satisfiability_over_candidates() {
        let (low, _, high) = lmh();
        let c = range(10, 18);
        assert!(!is_satisfiable_over(&low, &c, &[3, 7]).unwrap());
        assert!(is_satisfiable_over(&high, &c, &[3, 7]).unwrap());
        assert!(is_satisfiable_over(&Formula::True, &c, &[3, 7]).unwrap());
    }
}
