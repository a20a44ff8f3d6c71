//! Pretty-printer producing source that re-parses to an identical AST.

use std::fmt::Write;

use super::ast::{AssignValue, Expr, Stmt};
use super::spec::{SearchSpec, VarDecl, DEFAULT_UNROLL, EVALUATE, VALID_QUERY, VALID_TARGET};

pub fn print_spec(spec: &SearchSpec) -> String {
    let mut out = String::new();
    if spec.unroll != DEFAULT_UNROLL {
        writeln!(out, "option unroll {}", spec.unroll).unwrap();
    }
    // Constants come first so that labels and intervals are resolvable.
    for stmt in &spec.program {
        if let Stmt::Assign { name, value } = stmt {
            writeln!(out, "constant {name} = {}", assign_value(value, None)).unwrap();
        }
    }
    for d in &spec.targets {
        writeln!(out, "targets {}", decl(d)).unwrap();
    }
    for d in &spec.queries {
        writeln!(out, "queries {}", decl(d)).unwrap();
    }
    let labels: Vec<String> = spec.outcomes.iter().map(|o| format!("{o:?}")).collect();
    writeln!(out, "outcomes {}", labels.join(", ")).unwrap();

    for stmt in &spec.program {
        let Stmt::FunctionDefine { name, params, body } = stmt else {
            continue;
        };
        out.push('\n');
        let outcomes = (name == EVALUATE).then_some(spec.outcomes.as_slice());
        match name.as_str() {
            EVALUATE | VALID_TARGET | VALID_QUERY => write!(out, "{name} ").unwrap(),
            _ => write!(out, "function {name}({}) ", params.join(", ")).unwrap(),
        }
        block(&mut out, body, 0, outcomes);
        out.push('\n');
    }
    out
}

fn decl(d: &VarDecl) -> String {
    let all_same = d.ranges.windows(2).all(|w| w[0] == w[1]);
    let ranges = if all_same {
        format!("{}..{}", d.ranges[0].lo, d.ranges[0].hi)
    } else {
        let parts: Vec<String> = d
            .ranges
            .iter()
            .map(|r| format!("{}..{}", r.lo, r.hi))
            .collect();
        format!("[{}]", parts.join(", "))
    };
    if d.is_array {
        format!("{}[{}] in {ranges}", d.name, d.dim())
    } else {
        format!("{} in {ranges}", d.name)
    }
}

fn assign_value(v: &AssignValue, outcomes: Option<&[String]>) -> String {
    match v {
        AssignValue::Expr(e) => expr(e, outcomes),
        AssignValue::List(items) => {
            let parts: Vec<String> = items.iter().map(|e| expr(e, outcomes)).collect();
            format!("[{}]", parts.join(", "))
        }
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn block(out: &mut String, stmt: &Stmt, depth: usize, outcomes: Option<&[String]>) {
    match stmt {
        Stmt::Block { stmts } => {
            out.push_str("{\n");
            for s in stmts {
                indent(out, depth + 1);
                statement(out, s, depth + 1, outcomes);
                out.push('\n');
            }
            indent(out, depth);
            out.push('}');
        }
        // A non-block body is wrapped so the braces re-parse to a block that
        // contains it.
        other => {
            out.push_str("{\n");
            indent(out, depth + 1);
            statement(out, other, depth + 1, outcomes);
            out.push('\n');
            indent(out, depth);
            out.push('}');
        }
    }
}

fn statement(out: &mut String, stmt: &Stmt, depth: usize, outcomes: Option<&[String]>) {
    match stmt {
        Stmt::Block { .. } => block(out, stmt, depth, outcomes),
        Stmt::If { cond, then } => {
            write!(out, "if {} ", expr(cond, None)).unwrap();
            block(out, then, depth, outcomes);
        }
        Stmt::IfElse {
            cond,
            then,
            otherwise,
        } => {
            write!(out, "if {} ", expr(cond, None)).unwrap();
            block(out, then, depth, outcomes);
            out.push_str(" else ");
            match otherwise.as_ref() {
                nested @ (Stmt::If { .. } | Stmt::IfElse { .. }) => {
                    statement(out, nested, depth, outcomes)
                }
                other => block(out, other, depth, outcomes),
            }
        }
        Stmt::While { cond, body } => {
            write!(out, "while {} ", expr(cond, None)).unwrap();
            block(out, body, depth, outcomes);
        }
        Stmt::Assign { name, value } => {
            write!(out, "{name} = {}", assign_value(value, None)).unwrap();
        }
        Stmt::ArrayStore { name, index, value } => {
            write!(out, "{name}[{}] = {}", expr(index, None), expr(value, None)).unwrap();
        }
        Stmt::Return { value } => {
            write!(out, "return {}", expr(value, outcomes)).unwrap();
        }
        Stmt::FunctionDefine { name, params, body } => {
            write!(out, "function {name}({}) ", params.join(", ")).unwrap();
            block(out, body, depth, None);
        }
    }
}

/// Renders an expression. When `outcomes` is given and the expression is an
/// in-range integer literal, it is printed as the outcome label.
pub fn expr(e: &Expr, outcomes: Option<&[String]>) -> String {
    if let (Some(labels), Expr::IntConst { value }) = (outcomes, e) {
        if *value >= 0 && (*value as usize) < labels.len() {
            return format!("{:?}", labels[*value as usize]);
        }
    }
    match e {
        Expr::IntConst { value } => value.to_string(),
        Expr::BoolConst { value } => value.to_string(),
        Expr::VarRef { name } => name.clone(),
        Expr::ArrayAccess { name, index } => format!("{name}[{}]", expr(index, None)),
        Expr::Length { name } => format!("len({name})"),
        Expr::ArrayDeclare { size } => format!("array({})", expr(size, None)),
        Expr::FunctionCall { name, args } => {
            let parts: Vec<String> = args.iter().map(|a| expr(a, None)).collect();
            format!("{name}({})", parts.join(", "))
        }
        Expr::And { lhs, rhs } => format!("({} && {})", expr(lhs, None), expr(rhs, None)),
        Expr::Or { lhs, rhs } => format!("({} || {})", expr(lhs, None), expr(rhs, None)),
        Expr::Not { operand } => match operand.as_ref() {
            Expr::Less { lhs, rhs } => format!("({} <= {})", expr(rhs, None), expr(lhs, None)),
            Expr::Equal { lhs, rhs } => format!("({} != {})", expr(lhs, None), expr(rhs, None)),
            other => format!("!{}", atom(other)),
        },
        Expr::Less { lhs, rhs } => format!("({} < {})", expr(lhs, None), expr(rhs, None)),
        Expr::Equal { lhs, rhs } => format!("({} == {})", expr(lhs, None), expr(rhs, None)),
        Expr::Plus { lhs, rhs } => match rhs.as_ref() {
            Expr::Times { lhs: m, rhs: r } if **m == Expr::int(-1) => {
                format!("({} - {})", expr(lhs, None), atom(r))
            }
            _ => format!("({} + {})", expr(lhs, None), expr(rhs, None)),
        },
        Expr::Times { lhs, rhs } => format!("({} * {})", atom(lhs), atom(rhs)),
    }
}

/// Renders an operand that must bind tighter than any binary operator.
fn atom(e: &Expr) -> String {
    match e {
        Expr::IntConst { value } if *value < 0 => format!("({value})"),
        _ => expr(e, None),
    }
}
