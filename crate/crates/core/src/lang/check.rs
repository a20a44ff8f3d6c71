//! Static checks run after parsing: declarations, scoping, arity,
//! recursion, constant index bounds and return totality.

use std::collections::{HashMap, HashSet};

use super::ast::{AssignValue, Expr, Stmt};
use super::interp::Value;
use super::spec::{SearchSpec, EVALUATE, VALID_QUERY, VALID_TARGET};
use super::LangError;

fn sem(msg: impl Into<String>) -> LangError {
    LangError::Semantic(msg.into())
}

pub(crate) fn check_spec(spec: &SearchSpec) -> Result<(), LangError> {
    if spec.targets.is_empty() {
        return Err(sem("missing `targets` declaration"));
    }
    if spec.queries.is_empty() {
        return Err(sem("missing `queries` declaration"));
    }
    if spec.outcomes.is_empty() {
        return Err(sem("at least one outcome label is required"));
    }
    let mut labels = HashSet::new();
    for o in &spec.outcomes {
        if !labels.insert(o) {
            return Err(sem(format!("duplicate outcome label \"{o}\"")));
        }
    }

    let mut names = HashSet::new();
    for d in spec.targets.iter().chain(&spec.queries) {
        if !names.insert(d.name.as_str()) {
            return Err(sem(format!("`{}` declared twice", d.name)));
        }
        if spec.constants.contains_key(&d.name) {
            return Err(sem(format!(
                "`{}` is both a constant and a variable",
                d.name
            )));
        }
        if d.ranges.iter().any(|iv| iv.lo > iv.hi) {
            return Err(sem(format!("`{}` has an empty interval", d.name)));
        }
    }

    if spec.function(EVALUATE).is_none() {
        return Err(sem("missing `evaluate` block"));
    }

    let arities: HashMap<&str, usize> = spec
        .program
        .iter()
        .filter_map(|s| match s {
            Stmt::FunctionDefine { name, params, .. } => Some((name.as_str(), params.len())),
            _ => None,
        })
        .collect();

    // Statically known array lengths visible in a function scope.
    let mut global_lengths: HashMap<&str, Option<usize>> = HashMap::new();
    for (name, v) in &spec.constants {
        let len = match v {
            Value::Array(items) => Some(items.len()),
            _ => None,
        };
        global_lengths.insert(name.as_str(), len);
    }

    let mut calls: HashMap<&str, Vec<&str>> = HashMap::new();
    for stmt in &spec.program {
        let Stmt::FunctionDefine { name, params, body } = stmt else {
            continue;
        };
        if spec.constants.contains_key(name) {
            return Err(sem(format!("`{name}` is both a constant and a function")));
        }
        let special = matches!(name.as_str(), EVALUATE | VALID_TARGET | VALID_QUERY);
        let mut scope = Scope {
            arities: &arities,
            globals: &global_lengths,
            defined: HashSet::new(),
            lengths: HashMap::new(),
            reassigned: HashSet::new(),
            function: name,
        };
        let mut seen = HashSet::new();
        for p in params {
            if !seen.insert(p.as_str()) {
                return Err(sem(format!("function `{name}` repeats parameter `{p}`")));
            }
            scope.defined.insert(p.clone());
        }
        if special {
            for d in spec.targets.iter().chain(&spec.queries) {
                if params.contains(&d.name) {
                    let len = if d.is_array { Some(d.dim()) } else { None };
                    scope.lengths.insert(d.name.clone(), len);
                }
            }
        }
        collect_reassigned(body, &mut scope.reassigned);
        scope.stmt(body)?;
        if !body.always_returns() {
            return Err(sem(format!(
                "function `{name}` can finish without returning a value"
            )));
        }
        let mut callees = Vec::new();
        body.walk_exprs(&mut |e| {
            if let Expr::FunctionCall { name, .. } = e {
                callees.push(name.as_str());
            }
        });
        calls.insert(name.as_str(), callees);
    }

    // Reject recursion (direct or mutual).
    fn visit<'a>(
        f: &'a str,
        calls: &HashMap<&'a str, Vec<&'a str>>,
        stack: &mut Vec<&'a str>,
        done: &mut HashSet<&'a str>,
    ) -> Result<(), LangError> {
        if done.contains(f) {
            return Ok(());
        }
        if stack.contains(&f) {
            return Err(sem(format!("recursive call cycle through `{f}`")));
        }
        stack.push(f);
        for g in calls.get(f).into_iter().flatten() {
            visit(g, calls, stack, done)?;
        }
        stack.pop();
        done.insert(f);
        Ok(())
    }
    let mut done = HashSet::new();
    for f in calls.keys() {
        visit(f, &calls, &mut Vec::new(), &mut done)?;
    }
    Ok(())
}

fn collect_reassigned(stmt: &Stmt, out: &mut HashSet<String>) {
    match stmt {
        Stmt::Block { stmts } => stmts.iter().for_each(|s| collect_reassigned(s, out)),
        Stmt::If { then, .. } => collect_reassigned(then, out),
        Stmt::IfElse {
            then, otherwise, ..
        } => {
            collect_reassigned(then, out);
            collect_reassigned(otherwise, out);
        }
        Stmt::While { body, .. } => collect_reassigned(body, out),
        Stmt::Assign { name, .. } => {
            out.insert(name.clone());
        }
        _ => {}
    }
}

struct Scope<'a> {
    arities: &'a HashMap<&'a str, usize>,
    globals: &'a HashMap<&'a str, Option<usize>>,
    defined: HashSet<String>,
    lengths: HashMap<String, Option<usize>>,
    reassigned: HashSet<String>,
    function: &'a str,
}

impl Scope<'_> {
    fn known(&self, name: &str) -> bool {
        self.defined.contains(name) || self.globals.contains_key(name)
    }

    fn require(&self, name: &str) -> Result<(), LangError> {
        if self.known(name) {
            Ok(())
        } else {
            Err(sem(format!(
                "undeclared identifier `{name}` in `{}`",
                self.function
            )))
        }
    }

    /// Statically known length of `name`, if it is an array that is never
    /// reassigned in the current function. `Some(None)` marks a scalar.
    fn static_length(&self, name: &str) -> Option<Option<usize>> {
        if self.reassigned.contains(name) {
            return None;
        }
        if let Some(l) = self.lengths.get(name) {
            return Some(*l);
        }
        if self.defined.contains(name) {
            return None;
        }
        self.globals.get(name).copied()
    }

    fn stmt(&mut self, stmt: &Stmt) -> Result<(), LangError> {
        match stmt {
            Stmt::Block { stmts } => stmts.iter().try_for_each(|s| self.stmt(s)),
            Stmt::If { cond, then } => {
                self.expr(cond)?;
                self.stmt(then)
            }
            Stmt::IfElse {
                cond,
                then,
                otherwise,
            } => {
                self.expr(cond)?;
                self.stmt(then)?;
                self.stmt(otherwise)
            }
            Stmt::While { cond, body } => {
                self.expr(cond)?;
                self.stmt(body)
            }
            Stmt::Assign { name, value } => {
                match value {
                    AssignValue::Expr(e) => self.expr(e)?,
                    AssignValue::List(items) => items.iter().try_for_each(|e| self.expr(e))?,
                }
                if self.globals.contains_key(name.as_str()) {
                    return Err(sem(format!("cannot assign to constant `{name}`")));
                }
                self.defined.insert(name.clone());
                Ok(())
            }
            Stmt::ArrayStore { name, index, value } => {
                self.require(name)?;
                if self.globals.contains_key(name.as_str()) && !self.defined.contains(name) {
                    return Err(sem(format!("cannot modify constant `{name}`")));
                }
                self.index_check(name, index)?;
                self.expr(index)?;
                self.expr(value)
            }
            Stmt::Return { value } => self.expr(value),
            Stmt::FunctionDefine { name, .. } => Err(sem(format!(
                "function `{name}` must be defined at top level"
            ))),
        }
    }

    fn index_check(&self, name: &str, index: &Expr) -> Result<(), LangError> {
        match self.static_length(name) {
            Some(None) => Err(sem(format!("`{name}` is not an array"))),
            Some(Some(len)) => match index {
                Expr::IntConst { value } if *value < 0 || *value >= len as i64 => Err(sem(
                    format!("index {value} out of bounds for `{name}` of length {len}"),
                )),
                _ => Ok(()),
            },
            None => Ok(()),
        }
    }

    fn expr(&self, e: &Expr) -> Result<(), LangError> {
        match e {
            Expr::VarRef { name } => self.require(name),
            Expr::Length { name } => {
                self.require(name)?;
                match self.static_length(name) {
                    Some(None) => Err(sem(format!("`{name}` is not an array"))),
                    _ => Ok(()),
                }
            }
            Expr::ArrayAccess { name, index } => {
                self.require(name)?;
                self.index_check(name, index)?;
                self.expr(index)
            }
            Expr::FunctionCall { name, args } => {
                match self.arities.get(name.as_str()) {
                    None => return Err(sem(format!("call to undefined function `{name}`"))),
                    Some(_) if matches!(name.as_str(), EVALUATE | VALID_TARGET | VALID_QUERY) => {
                        return Err(sem(format!("`{name}` cannot be called")))
                    }
                    Some(&n) if n != args.len() => {
                        return Err(sem(format!(
                            "`{name}` expects {n} arguments, got {}",
                            args.len()
                        )))
                    }
                    Some(_) => {}
                }
                args.iter().try_for_each(|a| self.expr(a))
            }
            Expr::ArrayDeclare { size } => self.expr(size),
            Expr::Not { operand } => self.expr(operand),
            Expr::And { lhs, rhs }
            | Expr::Or { lhs, rhs }
            | Expr::Less { lhs, rhs }
            | Expr::Equal { lhs, rhs }
            | Expr::Plus { lhs, rhs }
            | Expr::Times { lhs, rhs } => {
                self.expr(lhs)?;
                self.expr(rhs)
            }
            Expr::IntConst { .. } | Expr::BoolConst { .. } => Ok(()),
        }
    }
}
