use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::ast::Stmt;
use super::interp::Value;

pub const EVALUATE: &str = "evaluate";
pub const VALID_TARGET: &str = "valid_target";
pub const VALID_QUERY: &str = "valid_query";

pub const DEFAULT_UNROLL: u32 = 64;

/// Inclusive integer interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Interval {
    pub lo: i64,
    pub hi: i64,
}

impl Interval {
    pub fn new(lo: i64, hi: i64) -> Self {
        Interval { lo, hi }
    }

    pub fn width(&self) -> u128 {
        if self.hi < self.lo {
            0
        } else {
            (self.hi as i128 - self.lo as i128 + 1) as u128
        }
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// One `targets`/`queries` declaration: a scalar (`t in 1..27`) or an array
/// with one interval per coordinate (`q[2] in 1..27`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VarDecl {
    pub name: String,
    pub is_array: bool,
    pub ranges: Vec<Interval>,
}

impl VarDecl {
    pub fn dim(&self) -> usize {
        self.ranges.len()
    }
}

/// A parsed and checked search-problem specification.
///
/// Targets and queries are flat integer vectors: the coordinates of every
/// declaration, concatenated in declaration order. Outcome labels returned by
/// `evaluate` are lowered to their index in [`SearchSpec::outcomes`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSpec {
    pub name: String,
    pub targets: Vec<VarDecl>,
    pub queries: Vec<VarDecl>,
    pub outcomes: Vec<String>,
    pub unroll: u32,
    /// Top-level constant assignments and function definitions, in source order.
    pub program: Vec<Stmt>,
    #[serde(skip)]
    pub(crate) constants: BTreeMap<String, Value>,
    #[serde(skip)]
    pub(crate) functions: HashMap<String, usize>,
}

/// Borrowed view of one `FunctionDefine`.
#[derive(Debug, Clone, Copy)]
pub struct FunctionRef<'a> {
    pub name: &'a str,
    pub params: &'a [String],
    pub body: &'a Stmt,
}

impl SearchSpec {
    pub fn target_dim(&self) -> usize {
        self.targets.iter().map(VarDecl::dim).sum()
    }

    pub fn query_dim(&self) -> usize {
        self.queries.iter().map(VarDecl::dim).sum()
    }

    pub fn target_box(&self) -> Vec<Interval> {
        self.targets
            .iter()
            .flat_map(|d| d.ranges.iter().copied())
            .collect()
    }

    pub fn query_box(&self) -> Vec<Interval> {
        self.queries
            .iter()
            .flat_map(|d| d.ranges.iter().copied())
            .collect()
    }

    pub fn function(&self, name: &str) -> Option<FunctionRef<'_>> {
        let idx = *self.functions.get(name)?;
        match &self.program[idx] {
            Stmt::FunctionDefine { name, params, body } => Some(FunctionRef { name, params, body }),
            _ => None,
        }
    }

    pub fn has_target_validity(&self) -> bool {
        self.functions.contains_key(VALID_TARGET)
    }

    pub fn has_query_validity(&self) -> bool {
        self.functions.contains_key(VALID_QUERY)
    }

    pub fn constants(&self) -> &BTreeMap<String, Value> {
        &self.constants
    }

    pub fn outcome_index(&self, label: &str) -> Option<usize> {
        self.outcomes.iter().position(|o| o == label)
    }

    /// Parameter names bound when calling `evaluate`: query declarations
    /// first, then target declarations.
    pub fn evaluate_params(&self) -> Vec<String> {
        self.queries
            .iter()
            .chain(self.targets.iter())
            .map(|d| d.name.clone())
            .collect()
    }
}

/// Number of integer points in a box, saturating at `u128::MAX`.
pub fn box_size(bx: &[Interval]) -> u128 {
    bx.iter()
        .try_fold(1u128, |acc, iv| acc.checked_mul(iv.width()))
        .unwrap_or(u128::MAX)
}
