//! The worthwhile-query predicate in its two equivalent forms.

use crate::constraint::{is_satisfiable_over, ConstraintError, Knowledge};
use crate::symexec::OutcomeConstraintMap;

/// Literal form: some outcome is possible under the knowledge and is not
/// already implied by it.
pub fn is_worthwhile_by_formula(
    phi: &OutcomeConstraintMap,
    k: &Knowledge,
    q: &[i64],
) -> Result<bool, ConstraintError> {
    for f in &phi.phis {
        if is_satisfiable_over(f, k.candidates(), q)?
            && is_satisfiable_over(&f.clone().negate(), k.candidates(), q)?
        {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Pair form: two candidates produce different outcomes. Stops at the first
/// disagreement.
pub fn is_worthwhile(
    phi: &OutcomeConstraintMap,
    k: &Knowledge,
    q: &[i64],
) -> Result<bool, ConstraintError> {
    let subs = phi.substitute_query(q);
    let outcome_of = |t: &[i64]| -> Result<Option<usize>, ConstraintError> {
        for (o, f) in subs.iter().enumerate() {
            if f.eval(t, q)? {
                return Ok(Some(o));
            }
        }
        Ok(None)
    };
    let mut first = None;
    for t in k.candidates() {
        let o = outcome_of(t)?;
        match first {
            None => first = Some(o),
            Some(prev) if prev != o => return Ok(true),
            Some(_) => {}
        }
    }
    Ok(false)
}
