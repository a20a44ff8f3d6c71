//! S-expression text form of formulas, e.g. `(and (le 1 t0) (lt t0 10))`.

use std::fmt;

use super::formula::Formula;
use super::term::{Term, Var};
use super::ConstraintError;

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Target(i) => write!(f, "t{i}"),
            Var::Query(i) => write!(f, "q{i}"),
        }
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, head: &str, items: &[T]) -> fmt::Result {
    write!(f, "({head}")?;
    for x in items {
        write!(f, " {x}")?;
    }
    write!(f, ")")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(v) => write!(f, "{v}"),
            Term::Var(v) => write!(f, "{v}"),
            Term::Add(items) => write_list(f, "+", items),
            Term::Mul(items) => write_list(f, "*", items),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::And(items) => write_list(f, "and", items),
            Formula::Or(items) => write_list(f, "or", items),
            Formula::Not(x) => match x.as_ref() {
                Formula::Less(a, b) => write!(f, "(le {b} {a})"),
                other => write!(f, "(not {other})"),
            },
            Formula::Less(a, b) => write!(f, "(lt {a} {b})"),
            Formula::Equal(a, b) => write!(f, "(eq {a} {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Sx {
    Atom(String),
    List(Vec<Sx>),
}

fn err(msg: impl Into<String>) -> ConstraintError {
    ConstraintError::Syntax(msg.into())
}

fn read(tokens: &[String], pos: &mut usize) -> Result<Sx, ConstraintError> {
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| err("unexpected end of input"))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sx::List(items));
                    }
                    Some(_) => items.push(read(tokens, pos)?),
                    None => return Err(err("unclosed parenthesis")),
                }
            }
        }
        ")" => Err(err("unexpected `)`")),
        atom => Ok(Sx::Atom(atom.to_string())),
    }
}

fn to_term(sx: &Sx) -> Result<Term, ConstraintError> {
    match sx {
        Sx::Atom(a) => {
            if let Ok(v) = a.parse::<i64>() {
                return Ok(Term::Const(v));
            }
            let (role, idx) = a.split_at(1);
            let i: usize = idx.parse().map_err(|_| err(format!("bad term `{a}`")))?;
            match role {
                "t" => Ok(Term::target(i)),
                "q" => Ok(Term::query(i)),
                _ => Err(err(format!("bad term `{a}`"))),
            }
        }
        Sx::List(items) => {
            let (head, rest) = items.split_first().ok_or_else(|| err("empty list"))?;
            let args = rest.iter().map(to_term).collect::<Result<Vec<_>, _>>()?;
            match head {
                Sx::Atom(h) if h == "+" => Ok(Term::Add(args)),
                Sx::Atom(h) if h == "*" => Ok(Term::Mul(args)),
                _ => Err(err("expected `+` or `*`")),
            }
        }
    }
}

fn to_formula(sx: &Sx) -> Result<Formula, ConstraintError> {
    match sx {
        Sx::Atom(a) if a == "true" => Ok(Formula::True),
        Sx::Atom(a) if a == "false" => Ok(Formula::False),
        Sx::Atom(a) => Err(err(format!("expected formula, found `{a}`"))),
        Sx::List(items) => {
            let Some((Sx::Atom(head), rest)) = items.split_first() else {
                return Err(err("expected an operator"));
            };
            let pair = || -> Result<(Term, Term), ConstraintError> {
                match rest {
                    [a, b] => Ok((to_term(a)?, to_term(b)?)),
                    _ => Err(err(format!("`{head}` takes two arguments"))),
                }
            };
            match head.as_str() {
                "and" => Ok(Formula::And(
                    rest.iter().map(to_formula).collect::<Result<_, _>>()?,
                )),
                "or" => Ok(Formula::Or(
                    rest.iter().map(to_formula).collect::<Result<_, _>>()?,
                )),
                "not" => match rest {
                    [x] => Ok(to_formula(x)?.negate()),
                    _ => Err(err("`not` takes one argument")),
                },
                "lt" => pair().map(|(a, b)| Formula::Less(a, b)),
                "le" => pair().map(|(a, b)| Formula::le(a, b)),
                "eq" => pair().map(|(a, b)| Formula::Equal(a, b)),
                other => Err(err(format!("unknown operator `{other}`"))),
            }
        }
    }
}

/// Parses the text produced by `Formula`'s `Display` impl.
pub fn parse_formula(text: &str) -> Result<Formula, ConstraintError> {
    let spaced = text.replace('(', " ( ").replace(')', " ) ");
    let tokens: Vec<String> = spaced.split_whitespace().map(str::to_string).collect();
    let mut pos = 0;
    let sx = read(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(err("trailing input"));
    }
    to_formula(&sx)
}
