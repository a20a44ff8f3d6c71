//! Symbolic execution of `evaluate` into per-outcome constraints.
//!
//! Targets and queries are symbolic variables. Every branch on a condition
//! that is not constant forks the state and extends its path condition. Each
//! state also carries the set of concrete (target, query) pairs that follow
//! it, so infeasible branches are pruned exactly whenever the whole domain
//! fits in memory.

use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::constraint::{
    DomainView, EnumerationCheck, Feasibility, FeasibilityCheck, Formula, Point, Term, Var,
};
use crate::lang::{
    box_size, enumerate_queries, sample_valid_queries, AssignValue, DomainError, EvalError, Expr,
    SearchSpec, Stmt, Value,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymexecError {
    #[error("more than {0} paths explored")]
    PathExplosion(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
}

#[derive(Debug, Clone)]
pub struct SymexecConfig {
    pub path_cap: usize,
    /// Above this many (target, query) pairs the witness sets are sampled.
    pub pair_cap: usize,
    pub pair_samples: usize,
    /// Above this many points in the query box the queries are sampled.
    pub query_enum_cap: u128,
    pub query_samples: usize,
    pub seed: u64,
}

impl Default for SymexecConfig {
    fn default() -> Self {
        SymexecConfig {
            path_cap: 100_000,
            pair_cap: 1 << 22,
            pair_samples: 1 << 16,
            query_enum_cap: 250_000,
            query_samples: 20_000,
            seed: 0,
        }
    }
}

/// One execution path of `evaluate`: its condition and the outcome index it
/// returns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathConstraint {
    pub psi: Formula,
    pub outcome: usize,
}

/// One formula per declared outcome: the disjunction of the path conditions
/// ending in it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeConstraintMap {
    pub labels: Vec<String>,
    pub phis: Vec<Formula>,
}

impl OutcomeConstraintMap {
    pub fn len(&self) -> usize {
        self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }

    pub fn phi(&self, outcome: usize) -> &Formula {
        &self.phis[outcome]
    }

    /// Outcomes whose formula is not syntactically false.
    pub fn reachable(&self) -> usize {
        self.phis.iter().filter(|f| **f != Formula::False).count()
    }

    /// Index of the first outcome whose formula holds at `(t, q)`.
    pub fn outcome_at(&self, t: &[i64], q: &[i64]) -> Option<usize> {
        self.phis.iter().position(|f| f.eval(t, q).unwrap_or(false))
    }

    /// Every formula with the query fixed to `q`.
    pub fn substitute_query(&self, q: &[i64]) -> Vec<Formula> {
        self.phis.iter().map(|f| f.substitute_query(q)).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SymexecStats {
    pub paths: usize,
    pub outcomes: usize,
    /// Whether pruning used the complete (target, query) domain.
    pub exact: bool,
    /// Error paths dropped because their feasibility was undecided.
    pub undecided_error_paths: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct SymexecOutput {
    pub paths: Vec<PathConstraint>,
    pub phi: OutcomeConstraintMap,
    pub stats: SymexecStats,
}

#[derive(Debug, Clone)]
enum SymValue {
    Int(Term),
    Bool(Formula),
    Array(Vec<SymValue>),
}

impl SymValue {
    fn from_value(v: &Value) -> SymValue {
        match v {
            Value::Int(i) => SymValue::Int(Term::Const(*i)),
            Value::Bool(b) => SymValue::Bool(Formula::from_bool(*b)),
            Value::Array(items) => {
                SymValue::Array(items.iter().map(SymValue::from_value).collect())
            }
        }
    }

    fn int(self) -> Result<Term, SymexecError> {
        match self {
            SymValue::Int(t) => Ok(t),
            _ => Err(EvalError::Type("expected integer".into()).into()),
        }
    }

    fn boolean(self) -> Result<Formula, SymexecError> {
        match self {
            SymValue::Bool(f) => Ok(f),
            _ => Err(EvalError::Type("expected boolean".into()).into()),
        }
    }
}

type Pair = (u32, u32);

#[derive(Debug, Clone)]
struct State {
    locals: HashMap<String, SymValue>,
    path: Vec<Formula>,
    witness: Vec<Pair>,
}

impl State {
    fn condition(&self) -> Formula {
        Formula::and(self.path.clone()).simplify()
    }
}

enum Flow {
    Next(State),
    Ret(State, SymValue),
}

struct Engine<'a> {
    spec: &'a SearchSpec,
    targets: &'a [Point],
    queries: &'a [Point],
    exact: bool,
    view: DomainView<'a>,
    backend: &'a dyn FeasibilityCheck,
    path_cap: usize,
    paths: usize,
    undecided: usize,
}

/// Runs symbolic execution over the valid `targets`, enumerating or sampling
/// queries as configured, with the default feasibility backend.
pub fn symbolic_execute(
    spec: &SearchSpec,
    targets: &[Point],
    config: &SymexecConfig,
) -> Result<SymexecOutput, SymexecError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (queries, complete) = if box_size(&spec.query_box()) <= config.query_enum_cap {
        (enumerate_queries(spec, config.query_enum_cap)?, true)
    } else {
        let attempts = config.query_samples.saturating_mul(64);
        (
            sample_valid_queries(spec, config.query_samples, attempts, &mut rng)?,
            false,
        )
    };
    let backend = EnumerationCheck {
        seed: config.seed,
        ..EnumerationCheck::default()
    };
    symbolic_execute_with(spec, targets, &queries, complete, config, &backend)
}

/// Symbolic execution against an explicit query pool. `queries_complete`
/// states that `queries` is every valid query.
pub fn symbolic_execute_with(
    spec: &SearchSpec,
    targets: &[Point],
    queries: &[Point],
    queries_complete: bool,
    config: &SymexecConfig,
    backend: &dyn FeasibilityCheck,
) -> Result<SymexecOutput, SymexecError> {
    let start = Instant::now();
    let total = (targets.len() as u128) * (queries.len() as u128);
    let exact = queries_complete && total <= config.pair_cap as u128;
    let witness: Vec<Pair> = if total == 0 {
        Vec::new()
    } else if total <= config.pair_cap as u128 {
        let mut w = Vec::with_capacity(total as usize);
        for ti in 0..targets.len() as u32 {
            for qi in 0..queries.len() as u32 {
                w.push((ti, qi));
            }
        }
        w
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed);
        let mut w: Vec<Pair> = (0..config.pair_samples)
            .map(|_| {
                (
                    rng.random_range(0..targets.len()) as u32,
                    rng.random_range(0..queries.len()) as u32,
                )
            })
            .collect();
        w.sort_unstable();
        w.dedup();
        w
    };
    let query_box = spec.query_box();
    let mut engine = Engine {
        spec,
        targets,
        queries,
        exact,
        view: DomainView {
            targets,
            query_box: &query_box,
            queries_unrestricted: !spec.has_query_validity(),
        },
        backend,
        path_cap: config.path_cap,
        paths: 1,
        undecided: 0,
    };

    let mut locals = HashMap::new();
    let mut offset = 0;
    for d in &spec.queries {
        locals.insert(
            d.name.clone(),
            symbolic_decl(d.is_array, d.dim(), offset, Term::query),
        );
        offset += d.dim();
    }
    offset = 0;
    for d in &spec.targets {
        locals.insert(
            d.name.clone(),
            symbolic_decl(d.is_array, d.dim(), offset, Term::target),
        );
        offset += d.dim();
    }
    let state = State {
        locals,
        path: Vec::new(),
        witness,
    };
    let evaluate = spec
        .function(crate::lang::spec::EVALUATE)
        .ok_or_else(|| SymexecError::Unsupported("missing evaluate".into()))?;

    let mut paths = Vec::new();
    for flow in engine.exec(state, evaluate.body)? {
        match flow {
            Flow::Ret(s, v) => engine.split_outcome(s, v.int()?, &mut paths)?,
            Flow::Next(_) => {
                return Err(EvalError::NoReturn(crate::lang::spec::EVALUATE.into()).into())
            }
        }
    }

    let n = spec.outcomes.len();
    let mut disjuncts: Vec<Vec<Formula>> = vec![Vec::new(); n];
    for p in &paths {
        disjuncts[p.outcome].push(p.psi.clone());
    }
    let phis: Vec<Formula> = disjuncts
        .into_iter()
        .map(|d| Formula::or(d).simplify())
        .collect();
    let phi = OutcomeConstraintMap {
        labels: spec.outcomes.clone(),
        phis,
    };
    let stats = SymexecStats {
        paths: paths.len(),
        outcomes: phi.reachable(),
        exact,
        undecided_error_paths: engine.undecided,
        elapsed: start.elapsed(),
    };
    Ok(SymexecOutput { paths, phi, stats })
}

fn symbolic_decl(is_array: bool, dim: usize, offset: usize, var: fn(usize) -> Term) -> SymValue {
    if is_array {
        SymValue::Array((0..dim).map(|i| SymValue::Int(var(offset + i))).collect())
    } else {
        SymValue::Int(var(offset))
    }
}

impl<'a> Engine<'a> {
    fn point(&self, p: Pair) -> (&'a [i64], &'a [i64]) {
        (&self.targets[p.0 as usize], &self.queries[p.1 as usize])
    }

    fn eval_at(&self, f: &Formula, p: Pair) -> Result<bool, SymexecError> {
        let (t, q) = self.point(p);
        f.eval(t, q).map_err(|_| EvalError::Overflow.into())
    }

    fn term_at(&self, term: &Term, p: Pair) -> Result<i64, SymexecError> {
        let (t, q) = self.point(p);
        term.eval(t, q).map_err(|_| EvalError::Overflow.into())
    }

    fn bump_paths(&mut self) -> Result<(), SymexecError> {
        self.paths += 1;
        if self.paths > self.path_cap {
            Err(SymexecError::PathExplosion(self.path_cap))
        } else {
            Ok(())
        }
    }

    /// Whether a branch with an empty witness set may still be feasible.
    fn maybe_feasible(&self, path: &[Formula], extra: &Formula) -> Feasibility {
        if self.exact {
            return Feasibility::Unsat;
        }
        let mut all = path.to_vec();
        all.push(extra.clone());
        self.backend.check(&Formula::and(all), &self.view)
    }

    /// Reports a runtime error reached on state `s` if some valid input can
    /// actually reach it; otherwise the path is dropped.
    fn fail(&mut self, s: &State, extra: &Formula, err: EvalError) -> Result<(), SymexecError> {
        if !s.witness.is_empty() {
            return Err(err.into());
        }
        match self.maybe_feasible(&s.path, extra) {
            Feasibility::Sat => Err(err.into()),
            Feasibility::Unsat => Ok(()),
            Feasibility::Unknown => {
                self.undecided += 1;
                Ok(())
            }
        }
    }

    /// Forks `s` on condition `c`; the true branch comes first.
    fn split(&mut self, s: State, c: Formula) -> Result<Vec<(State, bool)>, SymexecError> {
        let c = c.simplify();
        if let Some(b) = c.as_bool() {
            return Ok(vec![(s, b)]);
        }
        let mut yes = Vec::new();
        let mut no = Vec::new();
        for &p in &s.witness {
            if self.eval_at(&c, p)? {
                yes.push(p);
            } else {
                no.push(p);
            }
        }
        let not_c = c.clone().negate().simplify();
        let keep_yes = !yes.is_empty() || self.maybe_feasible(&s.path, &c) != Feasibility::Unsat;
        let keep_no = !no.is_empty() || self.maybe_feasible(&s.path, &not_c) != Feasibility::Unsat;
        let mut out = Vec::with_capacity(2);
        if keep_yes && keep_no {
            self.bump_paths()?;
        }
        let mut s_no = None;
        if keep_no {
            let mut t = if keep_yes {
                s.clone()
            } else {
                s.clone_without_witness()
            };
            t.path.push(not_c);
            t.witness = no;
            s_no = Some(t);
        }
        if keep_yes {
            let mut t = s;
            t.path.push(c);
            t.witness = yes;
            out.push((t, true));
        }
        if let Some(t) = s_no {
            out.push((t, false));
        }
        Ok(out)
    }

    /// Forks `s` on every feasible value of `term` within `0..len`. Values
    /// outside that range raise `oob` if reachable.
    fn split_values(
        &mut self,
        s: State,
        term: Term,
        len: usize,
        oob: impl Fn(i64) -> EvalError,
    ) -> Result<Vec<(State, i64)>, SymexecError> {
        let term = term.simplify();
        if let Some(v) = term.as_const() {
            if v < 0 || v as usize >= len {
                self.fail(&s, &Formula::True, oob(v))?;
                return Ok(Vec::new());
            }
            return Ok(vec![(s, v)]);
        }
        let mut groups: BTreeMap<i64, Vec<Pair>> = BTreeMap::new();
        for &p in &s.witness {
            groups.entry(self.term_at(&term, p)?).or_default().push(p);
        }
        let mut candidates: Vec<i64> = groups.keys().copied().collect();
        if !self.exact {
            let tbox = self.spec.target_box();
            let qbox = self.spec.query_box();
            let range = term.range(&|v| match v {
                Var::Target(i) => tbox.get(i).map(|iv| (iv.lo, iv.hi)),
                Var::Query(j) => qbox.get(j).map(|iv| (iv.lo, iv.hi)),
            });
            let (lo, hi) = range.ok_or_else(|| {
                SymexecError::Unsupported(format!("cannot bound symbolic value {term}"))
            })?;
            if hi - lo > 4096 {
                return Err(SymexecError::Unsupported(format!(
                    "symbolic value {term} ranges over more than 4096 values"
                )));
            }
            candidates = (lo..=hi).collect();
        }
        let mut out = Vec::new();
        let mut kept = 0usize;
        for v in candidates {
            let eq = Formula::equal(term.clone(), Term::Const(v));
            let witness = groups.remove(&v).unwrap_or_default();
            let mut t = s.clone_without_witness();
            t.witness = witness;
            if t.witness.is_empty() && self.maybe_feasible(&s.path, &eq) == Feasibility::Unsat {
                continue;
            }
            if v < 0 || v as usize >= len {
                self.fail(&t, &eq, oob(v))?;
                continue;
            }
            kept += 1;
            if kept > 1 {
                self.bump_paths()?;
            }
            t.path.push(eq);
            out.push((t, v));
        }
        Ok(out)
    }

    fn split_outcome(
        &mut self,
        s: State,
        term: Term,
        out: &mut Vec<PathConstraint>,
    ) -> Result<(), SymexecError> {
        let n = self.spec.outcomes.len();
        let oob = EvalError::BadOutcome;
        for (st, o) in self.split_values(s, term, n, oob)? {
            out.push(PathConstraint {
                psi: st.condition(),
                outcome: o as usize,
            });
        }
        Ok(())
    }

    fn lookup(&self, s: &State, name: &str) -> Result<SymValue, SymexecError> {
        if let Some(v) = s.locals.get(name) {
            return Ok(v.clone());
        }
        self.spec
            .constants()
            .get(name)
            .map(SymValue::from_value)
            .ok_or_else(|| EvalError::Unbound(name.to_string()).into())
    }

    fn exec(&mut self, s: State, stmt: &Stmt) -> Result<Vec<Flow>, SymexecError> {
        match stmt {
            Stmt::Block { stmts } => {
                let mut flows = vec![Flow::Next(s)];
                for st in stmts {
                    let mut next = Vec::with_capacity(flows.len());
                    for f in flows {
                        match f {
                            Flow::Next(s) => next.extend(self.exec(s, st)?),
                            ret => next.push(ret),
                        }
                    }
                    flows = next;
                }
                Ok(flows)
            }
            Stmt::If { cond, then } => self.exec_if(s, cond, then, None),
            Stmt::IfElse {
                cond,
                then,
                otherwise,
            } => self.exec_if(s, cond, then, Some(otherwise)),
            Stmt::While { cond, body } => {
                let bound = self.spec.unroll;
                let mut out = Vec::new();
                let mut active = vec![s];
                let mut iteration = 0u32;
                while !active.is_empty() {
                    let mut next = Vec::new();
                    for st in active {
                        for (s1, c) in self.eval(st, cond)? {
                            for (s2, taken) in self.split(s1, c.boolean()?)? {
                                if !taken {
                                    out.push(Flow::Next(s2));
                                } else if iteration == bound {
                                    self.fail(&s2, &Formula::True, EvalError::LoopBound(bound))?;
                                } else {
                                    for f in self.exec(s2, body)? {
                                        match f {
                                            Flow::Next(s3) => next.push(s3),
                                            ret => out.push(ret),
                                        }
                                    }
                                }
                            }
                        }
                    }
                    active = next;
                    iteration += 1;
                }
                Ok(out)
            }
            Stmt::Assign { name, value } => {
                let results = match value {
                    AssignValue::Expr(e) => self.eval(s, e)?,
                    AssignValue::List(items) => self
                        .eval_all(s, items)?
                        .into_iter()
                        .map(|(s, vs)| (s, SymValue::Array(vs)))
                        .collect(),
                };
                Ok(results
                    .into_iter()
                    .map(|(mut s, v)| {
                        s.locals.insert(name.clone(), v);
                        Flow::Next(s)
                    })
                    .collect())
            }
            Stmt::ArrayStore { name, index, value } => {
                let mut out = Vec::new();
                for (s1, idx) in self.eval(s, index)? {
                    for (mut s2, v) in self.eval(s1, value)? {
                        let arr = self.lookup(&s2, name)?;
                        let SymValue::Array(mut items) = arr else {
                            return Err(EvalError::Type(format!("`{name}` is not an array")).into());
                        };
                        let len = items.len();
                        let oob = |i| EvalError::IndexOutOfRange {
                            name: name.clone(),
                            index: i,
                            len,
                        };
                        let idx_term = idx.clone().int()?;
                        if let Some(i) = idx_term.simplify().as_const() {
                            if i >= 0 && (i as usize) < len {
                                items[i as usize] = v;
                                s2.locals.insert(name.clone(), SymValue::Array(items));
                                out.push(Flow::Next(s2));
                            } else {
                                self.fail(&s2, &Formula::True, oob(i))?;
                            }
                            continue;
                        }
                        for (mut s3, i) in self.split_values(s2, idx_term, len, oob)? {
                            let mut copy = items.clone();
                            copy[i as usize] = v.clone();
                            s3.locals.insert(name.clone(), SymValue::Array(copy));
                            out.push(Flow::Next(s3));
                        }
                    }
                }
                Ok(out)
            }
            Stmt::Return { value } => Ok(self
                .eval(s, value)?
                .into_iter()
                .map(|(s, v)| Flow::Ret(s, v))
                .collect()),
            Stmt::FunctionDefine { name, .. } => Err(SymexecError::Unsupported(format!(
                "nested definition of `{name}`"
            ))),
        }
    }

    fn exec_if(
        &mut self,
        s: State,
        cond: &Expr,
        then: &Stmt,
        otherwise: Option<&Stmt>,
    ) -> Result<Vec<Flow>, SymexecError> {
        let mut out = Vec::new();
        for (s1, c) in self.eval(s, cond)? {
            for (s2, taken) in self.split(s1, c.boolean()?)? {
                if taken {
                    out.extend(self.exec(s2, then)?);
                } else if let Some(other) = otherwise {
                    out.extend(self.exec(s2, other)?);
                } else {
                    out.push(Flow::Next(s2));
                }
            }
        }
        Ok(out)
    }

    fn eval_all(
        &mut self,
        s: State,
        items: &[Expr],
    ) -> Result<Vec<(State, Vec<SymValue>)>, SymexecError> {
        let mut acc = vec![(s, Vec::with_capacity(items.len()))];
        for e in items {
            let mut next = Vec::with_capacity(acc.len());
            for (s, vs) in acc {
                for (s1, v) in self.eval(s, e)? {
                    let mut vs1 = vs.clone();
                    vs1.push(v);
                    next.push((s1, vs1));
                }
            }
            acc = next;
        }
        Ok(acc)
    }

    fn eval_binary(
        &mut self,
        s: State,
        lhs: &Expr,
        rhs: &Expr,
        combine: impl Fn(SymValue, SymValue) -> Result<SymValue, SymexecError>,
    ) -> Result<Vec<(State, SymValue)>, SymexecError> {
        let mut out = Vec::new();
        for (s1, a) in self.eval(s, lhs)? {
            for (s2, b) in self.eval(s1, rhs)? {
                out.push((s2, combine(a.clone(), b)?));
            }
        }
        Ok(out)
    }

    /// Short-circuit `&&` (`is_and`) or `||`. The right operand is evaluated
    /// only where the left one does not decide the result.
    fn eval_junction(
        &mut self,
        s: State,
        lhs: &Expr,
        rhs: &Expr,
        is_and: bool,
    ) -> Result<Vec<(State, SymValue)>, SymexecError> {
        let mut out = Vec::new();
        for (s1, a) in self.eval(s, lhs)? {
            let a = a.boolean()?.simplify();
            match a.as_bool() {
                Some(b) if b != is_and => {
                    out.push((s1, SymValue::Bool(a)));
                    continue;
                }
                Some(_) => {
                    out.extend(self.eval(s1, rhs)?);
                    continue;
                }
                None => {}
            }
            // Try the right operand unconditionally; this is only valid when
            // it neither forks nor fails.
            let saved = (self.paths, self.undecided);
            let speculative = self.eval(s1.clone(), rhs);
            if let Ok(mut results) = speculative {
                if results.len() == 1 && results[0].0.path.len() == s1.path.len() {
                    let (s2, b) = results.pop().unwrap();
                    let b = b.boolean()?;
                    let f = if is_and {
                        Formula::and(vec![a, b])
                    } else {
                        Formula::or(vec![a, b])
                    };
                    out.push((s2, SymValue::Bool(f.simplify())));
                    continue;
                }
            }
            (self.paths, self.undecided) = saved;
            for (s2, taken) in self.split(s1, a)? {
                if taken == is_and {
                    out.extend(self.eval(s2, rhs)?);
                } else {
                    out.push((s2, SymValue::Bool(Formula::from_bool(taken))));
                }
            }
        }
        Ok(out)
    }

    fn call(
        &mut self,
        s: State,
        name: &str,
        args: Vec<SymValue>,
    ) -> Result<Vec<(State, SymValue)>, SymexecError> {
        let f = self
            .spec
            .function(name)
            .ok_or_else(|| EvalError::UndefinedFunction(name.to_string()))?;
        let mut callee = s;
        let caller_locals = std::mem::replace(
            &mut callee.locals,
            f.params.iter().cloned().zip(args).collect(),
        );
        let mut out = Vec::new();
        for flow in self.exec(callee, f.body)? {
            match flow {
                Flow::Ret(mut s, v) => {
                    s.locals = caller_locals.clone();
                    out.push((s, v));
                }
                Flow::Next(_) => return Err(EvalError::NoReturn(name.to_string()).into()),
            }
        }
        Ok(out)
    }

    fn eval(&mut self, s: State, e: &Expr) -> Result<Vec<(State, SymValue)>, SymexecError> {
        match e {
            Expr::IntConst { value } => Ok(vec![(s, SymValue::Int(Term::Const(*value)))]),
            Expr::BoolConst { value } => Ok(vec![(s, SymValue::Bool(Formula::from_bool(*value)))]),
            Expr::VarRef { name } => {
                let v = self.lookup(&s, name)?;
                Ok(vec![(s, v)])
            }
            Expr::Length { name } => match self.lookup(&s, name)? {
                SymValue::Array(items) => {
                    Ok(vec![(s, SymValue::Int(Term::Const(items.len() as i64)))])
                }
                _ => Err(EvalError::Type(format!("`{name}` is not an array")).into()),
            },
            Expr::ArrayDeclare { size } => {
                let mut out = Vec::new();
                for (s1, v) in self.eval(s, size)? {
                    let n = v.int()?.simplify().as_const().ok_or_else(|| {
                        SymexecError::Unsupported("array size depends on the input".into())
                    })?;
                    if !(0..=1 << 20).contains(&n) {
                        self.fail(&s1, &Formula::True, EvalError::ArraySize(n))?;
                        continue;
                    }
                    let items = vec![SymValue::Int(Term::Const(0)); n as usize];
                    out.push((s1, SymValue::Array(items)));
                }
                Ok(out)
            }
            Expr::ArrayAccess { name, index } => {
                let mut out = Vec::new();
                for (s1, idx) in self.eval(s, index)? {
                    let SymValue::Array(items) = self.lookup(&s1, name)? else {
                        return Err(EvalError::Type(format!("`{name}` is not an array")).into());
                    };
                    let len = items.len();
                    let oob = |i| EvalError::IndexOutOfRange {
                        name: name.clone(),
                        index: i,
                        len,
                    };
                    for (s2, i) in self.split_values(s1, idx.int()?, len, oob)? {
                        out.push((s2, items[i as usize].clone()));
                    }
                }
                Ok(out)
            }
            Expr::FunctionCall { name, args } => {
                let mut out = Vec::new();
                for (s1, vs) in self.eval_all(s, args)? {
                    out.extend(self.call(s1, name, vs)?);
                }
                Ok(out)
            }
            Expr::And { lhs, rhs } => self.eval_junction(s, lhs, rhs, true),
            Expr::Or { lhs, rhs } => self.eval_junction(s, lhs, rhs, false),
            Expr::Not { operand } => self
                .eval(s, operand)?
                .into_iter()
                .map(|(s, v)| Ok((s, SymValue::Bool(v.boolean()?.negate().simplify()))))
                .collect(),
            Expr::Less { lhs, rhs } => self.eval_binary(s, lhs, rhs, |a, b| {
                Ok(SymValue::Bool(Formula::less(a.int()?, b.int()?).simplify()))
            }),
            Expr::Equal { lhs, rhs } => self.eval_binary(s, lhs, rhs, |a, b| match (a, b) {
                (SymValue::Int(x), SymValue::Int(y)) => {
                    Ok(SymValue::Bool(Formula::equal(x, y).simplify()))
                }
                (SymValue::Bool(x), SymValue::Bool(y)) => {
                    let both = Formula::and(vec![x.clone(), y.clone()]);
                    let neither = Formula::and(vec![x.negate(), y.negate()]);
                    Ok(SymValue::Bool(Formula::or(vec![both, neither]).simplify()))
                }
                _ => Err(EvalError::Type("cannot compare arrays or mixed types".into()).into()),
            }),
            Expr::Plus { lhs, rhs } => self.eval_binary(s, lhs, rhs, |a, b| {
                arith(Term::Add(vec![a.int()?, b.int()?]))
            }),
            Expr::Times { lhs, rhs } => self.eval_binary(s, lhs, rhs, |a, b| {
                arith(Term::Mul(vec![a.int()?, b.int()?]))
            }),
        }
    }
}

/// Folds an arithmetic result, reporting constant overflow as the
/// interpreter would.
fn arith(t: Term) -> Result<SymValue, SymexecError> {
    let folded = t.simplify();
    if let Term::Add(items) | Term::Mul(items) = &folded {
        if items.iter().all(|x| x.as_const().is_some()) {
            return Err(EvalError::Overflow.into());
        }
    }
    Ok(SymValue::Int(folded))
}

impl State {
    fn clone_without_witness(&self) -> State {
        State {
            locals: self.locals.clone(),
            path: self.path.clone(),
            witness: Vec::new(),
        }
    }
}
