//! Abstract syntax of the search-problem language.
//!
//! The node set is deliberately small: a program is a list of statements,
//! expressions are built from integer/boolean constants, variable and array
//! references, function calls, `And`/`Or`/`Not`, `Less`/`Equal` and
//! `Plus`/`Times`. Surface conveniences (`<=`, `-`, `!=`, ...) are desugared
//! by the parser into these nodes.

use serde::Serialize;

/// A statement. `Block` is the statement-list node; a program is a list of
/// top-level statements (constant assignments and function definitions).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Stmt {
    Block {
        stmts: Vec<Stmt>,
    },
    If {
        cond: Expr,
        then: Box<Stmt>,
    },
    IfElse {
        cond: Expr,
        then: Box<Stmt>,
        otherwise: Box<Stmt>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    Assign {
        name: String,
        value: AssignValue,
    },
    ArrayStore {
        name: String,
        index: Expr,
        value: Expr,
    },
    Return {
        value: Expr,
    },
    FunctionDefine {
        name: String,
        params: Vec<String>,
        body: Box<Stmt>,
    },
}

/// Right-hand side of an assignment: a single expression or an array literal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value")]
pub enum AssignValue {
    Expr(Expr),
    List(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Expr {
    /// Fresh zero-filled array of the given length.
    ArrayDeclare {
        size: Box<Expr>,
    },
    ArrayAccess {
        name: String,
        index: Box<Expr>,
    },
    FunctionCall {
        name: String,
        args: Vec<Expr>,
    },
    Length {
        name: String,
    },
    And {
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Or {
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Not {
        operand: Box<Expr>,
    },
    Less {
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Equal {
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Plus {
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Times {
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    IntConst {
        value: i64,
    },
    BoolConst {
        value: bool,
    },
    VarRef {
        name: String,
    },
}

impl Expr {
    pub fn int(value: i64) -> Self {
        Expr::IntConst { value }
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expr::VarRef { name: name.into() }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(operand: Expr) -> Self {
        Expr::Not {
            operand: Box::new(operand),
        }
    }

    pub fn less(lhs: Expr, rhs: Expr) -> Self {
        Expr::Less {
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn equal(lhs: Expr, rhs: Expr) -> Self {
        Expr::Equal {
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn plus(lhs: Expr, rhs: Expr) -> Self {
        Expr::Plus {
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn times(lhs: Expr, rhs: Expr) -> Self {
        Expr::Times {
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn and(lhs: Expr, rhs: Expr) -> Self {
        Expr::And {
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn or(lhs: Expr, rhs: Expr) -> Self {
        Expr::Or {
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    /// Kind name as it appears in the JSON dump.
    pub fn kind(&self) -> &'static str {
        match self {
            Expr::ArrayDeclare { .. } => "ArrayDeclare",
            Expr::ArrayAccess { .. } => "ArrayAccess",
            Expr::FunctionCall { .. } => "FunctionCall",
            Expr::Length { .. } => "Length",
            Expr::And { .. } => "And",
            Expr::Or { .. } => "Or",
            Expr::Not { .. } => "Not",
            Expr::Less { .. } => "Less",
            Expr::Equal { .. } => "Equal",
            Expr::Plus { .. } => "Plus",
            Expr::Times { .. } => "Times",
            Expr::IntConst { .. } => "IntConst",
            Expr::BoolConst { .. } => "BoolConst",
            Expr::VarRef { .. } => "VarRef",
        }
    }

    /// Calls `f` on this expression and every sub-expression, pre-order.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::ArrayDeclare { size } => size.walk(f),
            Expr::ArrayAccess { index, .. } => index.walk(f),
            Expr::FunctionCall { args, .. } => args.iter().for_each(|a| a.walk(f)),
            Expr::Not { operand } => operand.walk(f),
            Expr::And { lhs, rhs }
            | Expr::Or { lhs, rhs }
            | Expr::Less { lhs, rhs }
            | Expr::Equal { lhs, rhs }
            | Expr::Plus { lhs, rhs }
            | Expr::Times { lhs, rhs } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            Expr::Length { .. }
            | Expr::IntConst { .. }
            | Expr::BoolConst { .. }
            | Expr::VarRef { .. } => {}
        }
    }
}

impl Stmt {
    pub fn kind(&self) -> &'static str {
        match self {
            Stmt::Block { .. } => "Block",
            Stmt::If { .. } => "If",
            Stmt::IfElse { .. } => "IfElse",
            Stmt::While { .. } => "While",
            Stmt::Assign { .. } => "Assign",
            Stmt::ArrayStore { .. } => "ArrayStore",
            Stmt::Return { .. } => "Return",
            Stmt::FunctionDefine { .. } => "FunctionDefine",
        }
    }

    /// Calls `f` on every expression reachable from this statement.
    pub fn walk_exprs<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        match self {
            Stmt::Block { stmts } => stmts.iter().for_each(|s| s.walk_exprs(f)),
            Stmt::If { cond, then } => {
                cond.walk(f);
                then.walk_exprs(f);
            }
            Stmt::IfElse {
                cond,
                then,
                otherwise,
            } => {
                cond.walk(f);
                then.walk_exprs(f);
                otherwise.walk_exprs(f);
            }
            Stmt::While { cond, body } => {
                cond.walk(f);
                body.walk_exprs(f);
            }
            Stmt::Assign { value, .. } => match value {
                AssignValue::Expr(e) => e.walk(f),
                AssignValue::List(items) => items.iter().for_each(|e| e.walk(f)),
            },
            Stmt::ArrayStore { index, value, .. } => {
                index.walk(f);
                value.walk(f);
            }
            Stmt::Return { value } => value.walk(f),
            Stmt::FunctionDefine { body, .. } => body.walk_exprs(f),
        }
    }

    /// True when every execution path through the statement ends in a
    /// `Return`. Loops never count as returning.
    pub fn always_returns(&self) -> bool {
        match self {
            Stmt::Return { .. } => true,
            Stmt::Block { stmts } => stmts.iter().any(Stmt::always_returns),
            Stmt::IfElse {
                then, otherwise, ..
            } => then.always_returns() && otherwise.always_returns(),
            _ => false,
        }
    }
}
