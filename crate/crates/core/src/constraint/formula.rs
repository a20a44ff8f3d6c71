use serde::Serialize;

use super::term::{Term, Var};
use super::ConstraintError;

/// Quantifier-free constraint over integer terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Formula {
    True,
    False,
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Less(Term, Term),
    Equal(Term, Term),
}

impl Formula {
    pub fn from_bool(b: bool) -> Formula {
        if b {
            Formula::True
        } else {
            Formula::False
        }
    }

    pub fn less(a: Term, b: Term) -> Formula {
        Formula::Less(a, b)
    }

    /// `a <= b`, stored as `!(b < a)`.
    pub fn le(a: Term, b: Term) -> Formula {
        Formula::Less(b, a).negate()
    }

    pub fn equal(a: Term, b: Term) -> Formula {
        Formula::Equal(a, b)
    }

    pub fn negate(self) -> Formula {
        Formula::Not(Box::new(self))
    }

    pub fn and(items: Vec<Formula>) -> Formula {
        Formula::And(items)
    }

    pub fn or(items: Vec<Formula>) -> Formula {
        Formula::Or(items)
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Formula::True => Some(true),
            Formula::False => Some(false),
            _ => None,
        }
    }

    pub fn eval(&self, t: &[i64], q: &[i64]) -> Result<bool, ConstraintError> {
        Ok(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::And(items) => {
                for f in items {
                    if !f.eval(t, q)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(items) => {
                for f in items {
                    if f.eval(t, q)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Not(f) => !f.eval(t, q)?,
            Formula::Less(a, b) => a.eval(t, q)? < b.eval(t, q)?,
            Formula::Equal(a, b) => a.eval(t, q)? == b.eval(t, q)?,
        })
    }

    pub fn substitute(&self, f: &impl Fn(Var) -> Option<Term>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::And(items) => Formula::And(items.iter().map(|x| x.substitute(f)).collect()),
            Formula::Or(items) => Formula::Or(items.iter().map(|x| x.substitute(f)).collect()),
            Formula::Not(x) => Formula::Not(Box::new(x.substitute(f))),
            Formula::Less(a, b) => Formula::Less(a.substitute(f), b.substitute(f)),
            Formula::Equal(a, b) => Formula::Equal(a.substitute(f), b.substitute(f)),
        }
    }

    /// Replaces every query coordinate by the matching entry of `q` and
    /// simplifies. The result mentions target variables only.
    pub fn substitute_query(&self, q: &[i64]) -> Formula {
        self.substitute(&|v| match v {
            Var::Query(j) => q.get(j).map(|&c| Term::Const(c)),
            Var::Target(_) => None,
        })
        .simplify()
    }

    /// Constant folding, flattening of nested connectives and double-negation
    /// elimination. Evaluation is preserved at every point.
    pub fn simplify(&self) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Less(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                match (a.as_const(), b.as_const()) {
                    (Some(x), Some(y)) => Formula::from_bool(x < y),
                    _ => Formula::Less(a, b),
                }
            }
            Formula::Equal(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                match (a.as_const(), b.as_const()) {
                    (Some(x), Some(y)) => Formula::from_bool(x == y),
                    _ => Formula::Equal(a, b),
                }
            }
            Formula::Not(x) => match x.simplify() {
                Formula::True => Formula::False,
                Formula::False => Formula::True,
                Formula::Not(inner) => *inner,
                other => Formula::Not(Box::new(other)),
            },
            Formula::And(items) => simplify_junction(items, true),
            Formula::Or(items) => simplify_junction(items, false),
        }
    }

    pub fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::And(items) | Formula::Or(items) => items.iter().for_each(|x| x.visit_vars(f)),
            Formula::Not(x) => x.visit_vars(f),
            Formula::Less(a, b) | Formula::Equal(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    /// Sorted, deduplicated list of the variables occurring in the formula.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.visit_vars(&mut |v| out.push(v));
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn mentions_query(&self) -> bool {
        let mut found = false;
        self.visit_vars(&mut |v| found |= matches!(v, Var::Query(_)));
        found
    }

    /// Number of nodes, for diagnostics.
    pub fn size(&self) -> usize {
        fn term_size(t: &Term) -> usize {
            match t {
                Term::Const(_) | Term::Var(_) => 1,
                Term::Add(xs) | Term::Mul(xs) => 1 + xs.iter().map(term_size).sum::<usize>(),
            }
        }
        match self {
            Formula::True | Formula::False => 1,
            Formula::And(items) | Formula::Or(items) => {
                1 + items.iter().map(Formula::size).sum::<usize>()
            }
            Formula::Not(x) => 1 + x.size(),
            Formula::Less(a, b) | Formula::Equal(a, b) => 1 + term_size(a) + term_size(b),
        }
    }
}

fn simplify_junction(items: &[Formula], is_and: bool) -> Formula {
    let (absorbing, unit) = if is_and {
        (Formula::False, Formula::True)
    } else {
        (Formula::True, Formula::False)
    };
    let mut out = Vec::with_capacity(items.len());
    let push = |x: Formula, out: &mut Vec<Formula>| -> bool {
        if x == absorbing {
            return true;
        }
        // Repeated conjuncts are common along execution paths.
        if x != unit && !(is_and && out.contains(&x)) {
            out.push(x);
        }
        false
    };
    for x in items {
        let s = x.simplify();
        let nested = match s {
            Formula::And(inner) if is_and => inner,
            Formula::Or(inner) if !is_and => inner,
            other => vec![other],
        };
        for y in nested {
            if push(y, &mut out) {
                return absorbing;
            }
        }
    }
    match out.len() {
        0 => unit,
        1 => out.pop().unwrap(),
        _ if is_and => Formula::And(out),
        _ => Formula::Or(out),
    }
}
