//! Concrete tree-walking interpreter.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::ast::{AssignValue, Expr, Stmt};
use super::spec::{SearchSpec, VarDecl, EVALUATE, VALID_QUERY, VALID_TARGET};

/// Arrays larger than this cannot be allocated by `array(n)`.
const MAX_ARRAY_LEN: i64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Array(Vec<Value>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Array(items) => {
                write!(f, "[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("loop exceeded the unroll bound of {0} iterations")]
    LoopBound(u32),
    #[error("index {index} out of range for `{name}` of length {len}")]
    IndexOutOfRange {
        name: String,
        index: i64,
        len: usize,
    },
    #[error("integer overflow")]
    Overflow,
    #[error("type error: {0}")]
    Type(String),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("undefined function `{0}`")]
    UndefinedFunction(String),
    #[error("function `{0}` finished without returning")]
    NoReturn(String),
    #[error("evaluate returned {0}, which is not a declared outcome")]
    BadOutcome(i64),
    #[error("invalid array size {0}")]
    ArraySize(i64),
    #[error("expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },
}

impl Value {
    fn as_int(&self) -> Result<i64, EvalError> {
        match self {
            Value::Int(v) => Ok(*v),
            other => Err(EvalError::Type(format!("expected integer, found {other}"))),
        }
    }

    fn as_bool(&self) -> Result<bool, EvalError> {
        match self {
            Value::Bool(b) => Ok(*b),
            other => Err(EvalError::Type(format!("expected boolean, found {other}"))),
        }
    }
}

fn index_of(name: &str, items: &[Value], index: i64) -> Result<usize, EvalError> {
    if index < 0 || index as usize >= items.len() {
        Err(EvalError::IndexOutOfRange {
            name: name.to_string(),
            index,
            len: items.len(),
        })
    } else {
        Ok(index as usize)
    }
}

struct Frame<'s> {
    spec: Option<&'s SearchSpec>,
    constants: &'s BTreeMap<String, Value>,
    locals: HashMap<String, Value>,
    unroll: u32,
}

impl<'s> Frame<'s> {
    fn lookup(&self, name: &str) -> Result<&Value, EvalError> {
        self.locals
            .get(name)
            .or_else(|| self.constants.get(name))
            .ok_or_else(|| EvalError::Unbound(name.to_string()))
    }

    fn exec(&mut self, stmt: &Stmt) -> Result<Option<Value>, EvalError> {
        match stmt {
            Stmt::Block { stmts } => {
                for s in stmts {
                    if let Some(v) = self.exec(s)? {
                        return Ok(Some(v));
                    }
                }
                Ok(None)
            }
            Stmt::If { cond, then } => {
                if self.eval(cond)?.as_bool()? {
                    self.exec(then)
                } else {
                    Ok(None)
                }
            }
            Stmt::IfElse {
                cond,
                then,
                otherwise,
            } => {
                if self.eval(cond)?.as_bool()? {
                    self.exec(then)
                } else {
                    self.exec(otherwise)
                }
            }
            Stmt::While { cond, body } => {
                let mut iterations = 0u32;
                while self.eval(cond)?.as_bool()? {
                    if iterations == self.unroll {
                        return Err(EvalError::LoopBound(self.unroll));
                    }
                    iterations += 1;
                    if let Some(v) = self.exec(body)? {
                        return Ok(Some(v));
                    }
                }
                Ok(None)
            }
            Stmt::Assign { name, value } => {
                let v = match value {
                    AssignValue::Expr(e) => self.eval(e)?,
                    AssignValue::List(items) => Value::Array(
                        items
                            .iter()
                            .map(|e| self.eval(e))
                            .collect::<Result<_, _>>()?,
                    ),
                };
                self.locals.insert(name.clone(), v);
                Ok(None)
            }
            Stmt::ArrayStore { name, index, value } => {
                let i = self.eval(index)?.as_int()?;
                let v = self.eval(value)?;
                if !self.locals.contains_key(name) {
                    // Copy-on-write of a constant array into the local frame.
                    let c = self.lookup(name)?.clone();
                    self.locals.insert(name.clone(), c);
                }
                match self.locals.get_mut(name) {
                    Some(Value::Array(items)) => {
                        let slot = index_of(name, items, i)?;
                        items[slot] = v;
                        Ok(None)
                    }
                    _ => Err(EvalError::Type(format!("`{name}` is not an array"))),
                }
            }
            Stmt::Return { value } => Ok(Some(self.eval(value)?)),
            Stmt::FunctionDefine { name, .. } => {
                Err(EvalError::Type(format!("nested definition of `{name}`")))
            }
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<Value, EvalError> {
        Ok(match e {
            Expr::IntConst { value } => Value::Int(*value),
            Expr::BoolConst { value } => Value::Bool(*value),
            Expr::VarRef { name } => self.lookup(name)?.clone(),
            Expr::ArrayAccess { name, index } => {
                let i = self.eval(index)?.as_int()?;
                match self.lookup(name)? {
                    Value::Array(items) => items[index_of(name, items, i)?].clone(),
                    _ => return Err(EvalError::Type(format!("`{name}` is not an array"))),
                }
            }
            Expr::Length { name } => match self.lookup(name)? {
                Value::Array(items) => Value::Int(items.len() as i64),
                _ => return Err(EvalError::Type(format!("`{name}` is not an array"))),
            },
            Expr::ArrayDeclare { size } => {
                let n = self.eval(size)?.as_int()?;
                if !(0..=MAX_ARRAY_LEN).contains(&n) {
                    return Err(EvalError::ArraySize(n));
                }
                Value::Array(vec![Value::Int(0); n as usize])
            }
            Expr::FunctionCall { name, args } => {
                let spec = self
                    .spec
                    .ok_or_else(|| EvalError::UndefinedFunction(name.clone()))?;
                let f = spec
                    .function(name)
                    .ok_or_else(|| EvalError::UndefinedFunction(name.clone()))?;
                let mut locals = HashMap::with_capacity(args.len());
                for (p, a) in f.params.iter().zip(args) {
                    let v = self.eval(a)?;
                    locals.insert(p.clone(), v);
                }
                let mut callee = Frame {
                    spec: self.spec,
                    constants: self.constants,
                    locals,
                    unroll: self.unroll,
                };
                callee
                    .exec(f.body)?
                    .ok_or_else(|| EvalError::NoReturn(name.clone()))?
            }
            Expr::And { lhs, rhs } => {
                Value::Bool(self.eval(lhs)?.as_bool()? && self.eval(rhs)?.as_bool()?)
            }
            Expr::Or { lhs, rhs } => {
                Value::Bool(self.eval(lhs)?.as_bool()? || self.eval(rhs)?.as_bool()?)
            }
            Expr::Not { operand } => Value::Bool(!self.eval(operand)?.as_bool()?),
            Expr::Less { lhs, rhs } => {
                let (a, b) = (self.eval(lhs)?.as_int()?, self.eval(rhs)?.as_int()?);
                Value::Bool(a < b)
            }
            Expr::Equal { lhs, rhs } => {
                let (a, b) = (self.eval(lhs)?, self.eval(rhs)?);
                match (&a, &b) {
                    (Value::Int(x), Value::Int(y)) => Value::Bool(x == y),
                    (Value::Bool(x), Value::Bool(y)) => Value::Bool(x == y),
                    _ => return Err(EvalError::Type(format!("cannot compare {a} and {b}"))),
                }
            }
            Expr::Plus { lhs, rhs } => {
                let (a, b) = (self.eval(lhs)?.as_int()?, self.eval(rhs)?.as_int()?);
                Value::Int(a.checked_add(b).ok_or(EvalError::Overflow)?)
            }
            Expr::Times { lhs, rhs } => {
                let (a, b) = (self.eval(lhs)?.as_int()?, self.eval(rhs)?.as_int()?);
                Value::Int(a.checked_mul(b).ok_or(EvalError::Overflow)?)
            }
        })
    }
}

/// Evaluates the right-hand side of a `constant` declaration, which may only
/// refer to earlier constants.
pub(crate) fn eval_constant(
    value: &AssignValue,
    constants: &BTreeMap<String, Value>,
) -> Result<Value, EvalError> {
    let mut frame = Frame {
        spec: None,
        constants,
        locals: HashMap::new(),
        unroll: 0,
    };
    match value {
        AssignValue::Expr(e) => frame.eval(e),
        AssignValue::List(items) => Ok(Value::Array(
            items
                .iter()
                .map(|e| frame.eval(e))
                .collect::<Result<_, _>>()?,
        )),
    }
}

fn bind(decls: &[VarDecl], point: &[i64], locals: &mut HashMap<String, Value>) {
    let mut offset = 0;
    for d in decls {
        let coords = &point[offset..offset + d.dim()];
        offset += d.dim();
        let v = if d.is_array {
            Value::Array(coords.iter().map(|&c| Value::Int(c)).collect())
        } else {
            Value::Int(coords[0])
        };
        locals.insert(d.name.clone(), v);
    }
}

fn check_arity(expected: usize, got: usize) -> Result<(), EvalError> {
    if expected == got {
        Ok(())
    } else {
        Err(EvalError::Arity { expected, got })
    }
}

fn call_special(
    spec: &SearchSpec,
    name: &str,
    locals: HashMap<String, Value>,
) -> Result<Value, EvalError> {
    let f = spec
        .function(name)
        .ok_or_else(|| EvalError::UndefinedFunction(name.to_string()))?;
    let mut frame = Frame {
        spec: Some(spec),
        constants: &spec.constants,
        locals,
        unroll: spec.unroll,
    };
    frame
        .exec(f.body)?
        .ok_or_else(|| EvalError::NoReturn(name.to_string()))
}

/// Runs `evaluate` on concrete inputs and returns the outcome index.
pub fn evaluate_concrete(
    spec: &SearchSpec,
    query: &[i64],
    target: &[i64],
) -> Result<usize, EvalError> {
    check_arity(spec.query_dim(), query.len())?;
    check_arity(spec.target_dim(), target.len())?;
    let mut locals = HashMap::new();
    bind(&spec.queries, query, &mut locals);
    bind(&spec.targets, target, &mut locals);
    let v = call_special(spec, EVALUATE, locals)?.as_int()?;
    if v < 0 || v as usize >= spec.outcomes.len() {
        return Err(EvalError::BadOutcome(v));
    }
    Ok(v as usize)
}

/// Label-returning convenience wrapper around [`evaluate_concrete`].
pub fn evaluate_label<'s>(
    spec: &'s SearchSpec,
    query: &[i64],
    target: &[i64],
) -> Result<&'s str, EvalError> {
    Ok(&spec.outcomes[evaluate_concrete(spec, query, target)?])
}

/// True when `target` lies in the declared box and satisfies `valid_target`.
pub fn is_valid_target(spec: &SearchSpec, target: &[i64]) -> Result<bool, EvalError> {
    check_arity(spec.target_dim(), target.len())?;
    if !spec
        .target_box()
        .iter()
        .zip(target)
        .all(|(iv, &v)| iv.contains(v))
    {
        return Ok(false);
    }
    if !spec.has_target_validity() {
        return Ok(true);
    }
    let mut locals = HashMap::new();
    bind(&spec.targets, target, &mut locals);
    call_special(spec, VALID_TARGET, locals)?.as_bool()
}

/// True when `query` lies in the declared box and satisfies `valid_query`.
pub fn is_valid_query(spec: &SearchSpec, query: &[i64]) -> Result<bool, EvalError> {
    check_arity(spec.query_dim(), query.len())?;
    if !spec
        .query_box()
        .iter()
        .zip(query)
        .all(|(iv, &v)| iv.contains(v))
    {
        return Ok(false);
    }
    if !spec.has_query_validity() {
        return Ok(true);
    }
    let mut locals = HashMap::new();
    bind(&spec.queries, query, &mut locals);
    call_special(spec, VALID_QUERY, locals)?.as_bool()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_spec;

    const LMH: &str = r#"
targets t in 1..27
queries q[2] in 1..27
outcomes "Low", "Middle", "High"
evaluate {
    if t < q[0] {
        return "Low"
    } else if q[0] <= t && t <= q[1] {
        return "Middle"
    } else {
        return "High"
    }
}
"#;

    #[test]
    fn low_middle_high_outcomes() {
        let spec = parse_spec("lmh27", LMH).unwrap();
        assert_eq!(evaluate_label(&spec, &[10, 18], &[5]).unwrap(), "Low");
        assert_eq!(evaluate_label(&spec, &[10, 18], &[10]).unwrap(), "Middle");
        assert_eq!(evaluate_label(&spec, &[10, 18], &[27]).unwrap(), "High");
    }

    #[test]
    fn loop_bound_is_an_error() {
        let src = "option unroll 5\ntargets t in 0..10\nqueries q in 0..10\noutcomes \"a\"\n\
                   evaluate { i = 0; while i < t { i = i + 1 }; return \"a\" }";
        let spec = parse_spec("s", src).unwrap();
        assert_eq!(evaluate_concrete(&spec, &[0], &[5]), Ok(0));
        assert_eq!(
            evaluate_concrete(&spec, &[0], &[6]),
            Err(EvalError::LoopBound(5))
        );
    }

    #[test]
    fn runtime_index_out_of_range() {
        let src = "constant A = [1, 2]\ntargets t in 0..3\nqueries q in 0..3\noutcomes \"a\"\n\
                   evaluate { x = A[q]; return \"a\" }";
        let spec = parse_spec("s", src).unwrap();
        assert!(evaluate_concrete(&spec, &[1], &[0]).is_ok());
        assert!(matches!(
            evaluate_concrete(&spec, &[2], &[0]),
            Err(EvalError::IndexOutOfRange {
                index: 2,
                len: 2,
                ..
            })
        ));
    }

    #[test]
    fn overflow_detected() {
        let src = "targets t in 0..3\nqueries q in 0..3\noutcomes \"a\"\n\
                   evaluate { x = 9223372036854775807 + t; return \"a\" }";
        let spec = parse_spec("s", src).unwrap();
        assert_eq!(evaluate_concrete(&spec, &[0], &[0]), Ok(0));
        assert_eq!(
            evaluate_concrete(&spec, &[0], &[1]),
            Err(EvalError::Overflow)
        );
    }

    #[test]
    fn integer_return_selects_outcome_by_index() {
        let src = "targets t[2] in 0..1\nqueries q[2] in 0..1\noutcomes \"r0\", \"r1\", \"r2\"\n\
                   function same(a, b) { if a == b { return 1 } else { return 0 } }\n\
                   evaluate { return same(t[0], q[0]) + same(t[1], q[1]) }";
        let spec = parse_spec("s", src).unwrap();
        assert_eq!(evaluate_label(&spec, &[0, 1], &[0, 1]).unwrap(), "r2");
        assert_eq!(evaluate_label(&spec, &[0, 1], &[1, 1]).unwrap(), "r1");
    }

    #[test]
    fn array_store_on_local_copy() {
        let src =
            "constant A = [5, 6]\ntargets t in 0..1\nqueries q in 0..1\noutcomes \"a\", \"b\"\n\
                   function f(x) { B = array(2); B[x] = 1; return B[0] }\n\
                   evaluate { if f(t) == 1 { return \"a\" } else { return \"b\" } }";
        let spec = parse_spec("s", src).unwrap();
        assert_eq!(evaluate_label(&spec, &[0], &[0]).unwrap(), "a");
        assert_eq!(evaluate_label(&spec, &[0], &[1]).unwrap(), "b");
    }

    #[test]
    fn validity_predicates() {
        let src = "targets t[2] in 0..2\nqueries q in 0..2\noutcomes \"a\"\n\
                   valid_target { return !(t[0] == t[1]) }\nvalid_query { return q < 2 }\n\
                   evaluate { return \"a\" }";
        let spec = parse_spec("s", src).unwrap();
        assert!(is_valid_target(&spec, &[0, 1]).unwrap());
        assert!(!is_valid_target(&spec, &[1, 1]).unwrap());
        assert!(!is_valid_target(&spec, &[3, 1]).unwrap());
        assert!(is_valid_query(&spec, &[1]).unwrap());
        assert!(!is_valid_query(&spec, &[2]).unwrap());
    }
}
