use serde::Serialize;

use super::ConstraintError;

/// A variable tagged with its role: coordinate `i` of the target or of the
/// query vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Var {
    Target(usize),
    Query(usize),
}

/// Integer term over target and query coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Term {
    Const(i64),
    Var(Var),
    Add(Vec<Term>),
    Mul(Vec<Term>),
}

impl Term {
    pub fn target(i: usize) -> Term {
        Term::Var(Var::Target(i))
    }

    pub fn query(i: usize) -> Term {
        Term::Var(Var::Query(i))
    }

    pub fn as_const(&self) -> Option<i64> {
        match self {
            Term::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn eval(&self, t: &[i64], q: &[i64]) -> Result<i64, ConstraintError> {
        match self {
            Term::Const(v) => Ok(*v),
            Term::Var(var) => lookup(*var, t, q),
            Term::Add(items) => items.iter().try_fold(0i64, |acc, x| {
                acc.checked_add(x.eval(t, q)?)
                    .ok_or(ConstraintError::Overflow)
            }),
            Term::Mul(items) => items.iter().try_fold(1i64, |acc, x| {
                acc.checked_mul(x.eval(t, q)?)
                    .ok_or(ConstraintError::Overflow)
            }),
        }
    }

    /// Replaces variables for which `f` returns a term. The result is not
    /// simplified.
    pub fn substitute(&self, f: &impl Fn(Var) -> Option<Term>) -> Term {
        match self {
            Term::Const(_) => self.clone(),
            Term::Var(v) => f(*v).unwrap_or_else(|| self.clone()),
            Term::Add(items) => Term::Add(items.iter().map(|x| x.substitute(f)).collect()),
            Term::Mul(items) => Term::Mul(items.iter().map(|x| x.substitute(f)).collect()),
        }
    }

    pub fn simplify(&self) -> Term {
        match self {
            Term::Const(_) | Term::Var(_) => self.clone(),
            Term::Add(items) => fold_nary(items, true),
            Term::Mul(items) => fold_nary(items, false),
        }
    }

    pub fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => f(*v),
            Term::Add(items) | Term::Mul(items) => items.iter().for_each(|x| x.visit_vars(f)),
        }
    }

    /// Conservative range of the term when every variable ranges over the
    /// given bounds. `None` if a variable is unbounded or the range overflows.
    pub fn range(&self, bounds: &impl Fn(Var) -> Option<(i64, i64)>) -> Option<(i64, i64)> {
        match self {
            Term::Const(v) => Some((*v, *v)),
            Term::Var(v) => bounds(*v),
            Term::Add(items) => items.iter().try_fold((0i64, 0i64), |(lo, hi), x| {
                let (a, b) = x.range(bounds)?;
                Some((lo.checked_add(a)?, hi.checked_add(b)?))
            }),
            Term::Mul(items) => items.iter().try_fold((1i64, 1i64), |(lo, hi), x| {
                let (a, b) = x.range(bounds)?;
                let corners = [
                    lo.checked_mul(a)?,
                    lo.checked_mul(b)?,
                    hi.checked_mul(a)?,
                    hi.checked_mul(b)?,
                ];
                Some((*corners.iter().min()?, *corners.iter().max()?))
            }),
        }
    }
}

pub(crate) fn lookup(var: Var, t: &[i64], q: &[i64]) -> Result<i64, ConstraintError> {
    let slot = match var {
        Var::Target(i) => t.get(i),
        Var::Query(i) => q.get(i),
    };
    slot.copied().ok_or(ConstraintError::UnboundVariable(var))
}

fn fold_nary(items: &[Term], is_add: bool) -> Term {
    let unit = if is_add { 0 } else { 1 };
    let mut acc = unit;
    let mut rest = Vec::new();
    let push = |x: Term, acc: &mut i64, rest: &mut Vec<Term>| match x {
        Term::Const(v) => {
            let folded = if is_add {
                acc.checked_add(v)
            } else {
                acc.checked_mul(v)
            };
            match folded {
                Some(n) => *acc = n,
                // Leave overflowing constants in place so evaluation reports it.
                None => rest.push(Term::Const(v)),
            }
        }
        other => rest.push(other),
    };
    for x in items {
        match x.simplify() {
            Term::Add(inner) if is_add => {
                inner.into_iter().for_each(|y| push(y, &mut acc, &mut rest))
            }
            Term::Mul(inner) if !is_add => {
                inner.into_iter().for_each(|y| push(y, &mut acc, &mut rest))
            }
            other => push(other, &mut acc, &mut rest),
        }
    }
    if !is_add
        && acc == 0
        && rest
            .iter()
            .all(|x| matches!(x, Term::Const(_) | Term::Var(_)))
    {
        return Term::Const(0);
    }
    if acc != unit || rest.is_empty() {
        rest.insert(0, Term::Const(acc));
    }
    if rest.len() == 1 {
        rest.pop().unwrap()
    } else if is_add {
        Term::Add(rest)
    } else {
        Term::Mul(rest)
    }
}
