use std::collections::{BTreeMap, HashMap};

use super::ast::{AssignValue, Expr, Stmt};
use super::check;
use super::interp::{self, Value};
use super::lexer::{tokenize, Pos, Tok, Token};
use super::spec::{
    Interval, SearchSpec, VarDecl, DEFAULT_UNROLL, EVALUATE, VALID_QUERY, VALID_TARGET,
};
use super::LangError;

const KEYWORDS: &[&str] = &[
    "targets",
    "queries",
    "outcomes",
    "constant",
    "option",
    "evaluate",
    "valid_target",
    "valid_query",
    "function",
    "if",
    "else",
    "while",
    "return",
    "true",
    "false",
    "len",
    "array",
    "in",
];

/// Parses and checks a `.search` source. `name` becomes [`SearchSpec::name`].
pub fn parse_spec(name: &str, source: &str) -> Result<SearchSpec, LangError> {
    let tokens = tokenize(source)?;
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        outcomes: None,
        constants: BTreeMap::new(),
    };
    let mut targets = Vec::new();
    let mut queries = Vec::new();
    let mut unroll = None;
    let mut program = Vec::new();

    loop {
        p.skip_separators();
        if p.peek() == &Tok::Eof {
            break;
        }
        let pos = p.here();
        let word = match p.next_tok() {
            Tok::Ident(w) => w,
            other => {
                return Err(p.error_at(pos, format!("expected a declaration, found {other:?}")))
            }
        };
        match word.as_str() {
            "targets" => targets.push(p.var_decl()?),
            "queries" => queries.push(p.var_decl()?),
            "outcomes" => {
                if p.outcomes.is_some() {
                    return Err(p.error_at(pos, "outcomes declared twice".into()));
                }
                let mut labels = vec![p.string()?];
                while p.eat(&Tok::Comma) {
                    labels.push(p.string()?);
                }
                p.outcomes = Some(labels);
            }
            "constant" => {
                let name = p.ident()?;
                p.expect(&Tok::Assign)?;
                let value = p.assign_value()?;
                let v = interp::eval_constant(&value, &p.constants)
                    .map_err(|e| p.error_at(pos, format!("constant `{name}`: {e}")))?;
                if p.constants.insert(name.clone(), v).is_some() {
                    return Err(LangError::Semantic(format!(
                        "constant `{name}` defined twice"
                    )));
                }
                program.push(Stmt::Assign { name, value });
            }
            "option" => {
                let key = p.ident()?;
                let v = p.const_int()?;
                match key.as_str() {
                    "unroll" if v > 0 && v <= u32::MAX as i64 => unroll = Some(v as u32),
                    "unroll" => return Err(p.error_at(pos, "unroll bound must be positive".into())),
                    _ => return Err(p.error_at(pos, format!("unknown option `{key}`"))),
                }
            }
            "evaluate" | "valid_target" | "valid_query" => {
                let body = p.block()?;
                program.push(Stmt::FunctionDefine {
                    name: word,
                    params: Vec::new(),
                    body: Box::new(body),
                });
            }
            "function" => {
                let name = p.ident()?;
                p.expect(&Tok::LParen)?;
                let mut params = Vec::new();
                if !p.eat(&Tok::RParen) {
                    params.push(p.ident()?);
                    while p.eat(&Tok::Comma) {
                        params.push(p.ident()?);
                    }
                    p.expect(&Tok::RParen)?;
                }
                let body = p.block()?;
                program.push(Stmt::FunctionDefine {
                    name,
                    params,
                    body: Box::new(body),
                });
            }
            other => return Err(p.error_at(pos, format!("unknown declaration `{other}`"))),
        }
        p.end_of_statement()?;
    }

    let outcomes = p
        .outcomes
        .take()
        .ok_or_else(|| LangError::Semantic("missing `outcomes` declaration".into()))?;
    let query_names: Vec<String> = queries.iter().map(|d: &VarDecl| d.name.clone()).collect();
    let target_names: Vec<String> = targets.iter().map(|d: &VarDecl| d.name.clone()).collect();

    // Constants are global, so they are kept ahead of every function.
    program.sort_by_key(|s| matches!(s, Stmt::FunctionDefine { .. }));

    // The special functions take the declared variables as parameters.
    let mut functions = HashMap::new();
    for (idx, stmt) in program.iter_mut().enumerate() {
        if let Stmt::FunctionDefine { name, params, .. } = stmt {
            match name.as_str() {
                EVALUATE => *params = query_names.iter().chain(&target_names).cloned().collect(),
                VALID_TARGET => *params = target_names.clone(),
                VALID_QUERY => *params = query_names.clone(),
                _ => {}
            }
            if functions.insert(name.clone(), idx).is_some() {
                return Err(LangError::Semantic(format!(
                    "function `{name}` defined twice"
                )));
            }
        }
    }

    let spec = SearchSpec {
        name: name.to_string(),
        targets,
        queries,
        outcomes,
        unroll: unroll.unwrap_or(DEFAULT_UNROLL),
        program,
        constants: p.constants,
        functions,
    };
    check::check_spec(&spec)?;
    Ok(spec)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    outcomes: Option<Vec<String>>,
    constants: BTreeMap<String, Value>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> Pos {
        self.toks[self.pos].pos
    }

    fn next_tok(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.next_tok();
            true
        } else {
            false
        }
    }

    fn error_at(&self, pos: Pos, msg: String) -> LangError {
        LangError::Parse {
            line: pos.line,
            col: pos.col,
            msg,
        }
    }

    fn error(&self, msg: String) -> LangError {
        self.error_at(self.here(), msg)
    }

    fn expect(&mut self, tok: &Tok) -> Result<(), LangError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected {tok:?}, found {:?}", self.peek())))
        }
    }

    fn skip_separators(&mut self) {
        while matches!(self.peek(), Tok::Newline | Tok::Semi) {
            self.next_tok();
        }
    }

    fn skip_newlines(&mut self) {
        while self.peek() == &Tok::Newline {
            self.next_tok();
        }
    }

    fn end_of_statement(&mut self) -> Result<(), LangError> {
        match self.peek() {
            Tok::Newline | Tok::Semi | Tok::Eof | Tok::RBrace => Ok(()),
            other => Err(self.error(format!("expected end of statement, found {other:?}"))),
        }
    }

    fn ident(&mut self) -> Result<String, LangError> {
        match self.peek().clone() {
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                self.next_tok();
                Ok(name)
            }
            other => Err(self.error(format!("expected identifier, found {other:?}"))),
        }
    }

    fn keyword(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == word)
    }

    fn string(&mut self) -> Result<String, LangError> {
        match self.next_tok() {
            Tok::Str(s) => Ok(s),
            other => Err(self.error(format!("expected string literal, found {other:?}"))),
        }
    }

    /// Integer literal, optionally negated, or the name of an integer constant.
    fn const_int(&mut self) -> Result<i64, LangError> {
        let neg = self.eat(&Tok::Minus);
        let v = match self.next_tok() {
            Tok::Int(v) => v,
            Tok::Ident(name) => match self.constants.get(&name) {
                Some(Value::Int(v)) => *v,
                _ => return Err(self.error(format!("`{name}` is not an integer constant"))),
            },
            other => return Err(self.error(format!("expected integer, found {other:?}"))),
        };
        Ok(if neg { -v } else { v })
    }

    fn interval(&mut self) -> Result<Interval, LangError> {
        let pos = self.here();
        let lo = self.const_int()?;
        self.expect(&Tok::DotDot)?;
        let hi = self.const_int()?;
        if lo > hi {
            return Err(self.error_at(pos, format!("empty interval {lo}..{hi}")));
        }
        Ok(Interval::new(lo, hi))
    }

    fn var_decl(&mut self) -> Result<VarDecl, LangError> {
        let name = self.ident()?;
        let dim = if self.eat(&Tok::LBracket) {
            let pos = self.here();
            let d = self.const_int()?;
            self.expect(&Tok::RBracket)?;
            if d < 1 {
                return Err(self.error_at(pos, "array dimension must be at least 1".into()));
            }
            Some(d as usize)
        } else {
            None
        };
        match self.next_tok() {
            Tok::Ident(w) if w == "in" => {}
            other => return Err(self.error(format!("expected `in`, found {other:?}"))),
        }
        let ranges = if self.eat(&Tok::LBracket) {
            let mut ranges = vec![self.interval()?];
            while self.eat(&Tok::Comma) {
                ranges.push(self.interval()?);
            }
            self.expect(&Tok::RBracket)?;
            if let Some(d) = dim {
                if d != ranges.len() {
                    return Err(self.error(format!(
                        "`{name}` declares {d} coordinates but {} ranges",
                        ranges.len()
                    )));
                }
            }
            ranges
        } else {
            let iv = self.interval()?;
            vec![iv; dim.unwrap_or(1)]
        };
        let is_array = dim.is_some() || ranges.len() > 1;
        Ok(VarDecl {
            name,
            is_array,
            ranges,
        })
    }

    fn block(&mut self) -> Result<Stmt, LangError> {
        self.expect(&Tok::LBrace)?;
        let mut stmts = Vec::new();
        loop {
            self.skip_separators();
            if self.eat(&Tok::RBrace) {
                break;
            }
            if self.peek() == &Tok::Eof {
                return Err(self.error("unclosed block".into()));
            }
            stmts.push(self.stmt()?);
            self.end_of_statement()?;
        }
        Ok(Stmt::Block { stmts })
    }

    fn stmt(&mut self) -> Result<Stmt, LangError> {
        if self.peek() == &Tok::LBrace {
            return self.block();
        }
        if self.keyword("if") {
            return self.if_stmt();
        }
        if self.keyword("while") {
            self.next_tok();
            let cond = self.expr()?;
            let body = self.block()?;
            return Ok(Stmt::While {
                cond,
                body: Box::new(body),
            });
        }
        if self.keyword("return") {
            self.next_tok();
            let value = self.expr()?;
            return Ok(Stmt::Return { value });
        }
        let name = self.ident()?;
        if self.eat(&Tok::LBracket) {
            let index = self.expr()?;
            self.expect(&Tok::RBracket)?;
            self.expect(&Tok::Assign)?;
            let value = self.expr()?;
            return Ok(Stmt::ArrayStore { name, index, value });
        }
        self.expect(&Tok::Assign)?;
        let value = self.assign_value()?;
        Ok(Stmt::Assign { name, value })
    }

    fn assign_value(&mut self) -> Result<AssignValue, LangError> {
        if self.eat(&Tok::LBracket) {
            let mut items = Vec::new();
            if !self.eat(&Tok::RBracket) {
                items.push(self.expr()?);
                while self.eat(&Tok::Comma) {
                    items.push(self.expr()?);
                }
                self.expect(&Tok::RBracket)?;
            }
            Ok(AssignValue::List(items))
        } else {
            Ok(AssignValue::Expr(self.expr()?))
        }
    }

    fn if_stmt(&mut self) -> Result<Stmt, LangError> {
        self.next_tok(); // `if`
        let cond = self.expr()?;
        let then = Box::new(self.block()?);
        // `else` may follow on the next line.
        let mut look = 0;
        while self.peek_at(look) == &Tok::Newline {
            look += 1;
        }
        if matches!(self.peek_at(look), Tok::Ident(w) if w == "else") {
            self.skip_newlines();
            self.next_tok();
            let otherwise = if self.keyword("if") {
                self.if_stmt()?
            } else {
                self.block()?
            };
            Ok(Stmt::IfElse {
                cond,
                then,
                otherwise: Box::new(otherwise),
            })
        } else {
            Ok(Stmt::If { cond, then })
        }
    }

    fn expr(&mut self) -> Result<Expr, LangError> {
        let mut lhs = self.and_expr()?;
        while self.eat(&Tok::OrOr) {
            let rhs = self.and_expr()?;
            lhs = Expr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, LangError> {
        let mut lhs = self.cmp_expr()?;
        while self.eat(&Tok::AndAnd) {
            let rhs = self.cmp_expr()?;
            lhs = Expr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self) -> Result<Expr, LangError> {
        let lhs = self.add_expr()?;
        let op = self.peek().clone();
        let build: fn(Expr, Expr) -> Expr = match op {
            Tok::Lt => Expr::less,
            Tok::Gt => |a, b| Expr::less(b, a),
            Tok::Le => |a, b| Expr::not(Expr::less(b, a)),
            Tok::Ge => |a, b| Expr::not(Expr::less(a, b)),
            Tok::EqEq => Expr::equal,
            Tok::NotEq => |a, b| Expr::not(Expr::equal(a, b)),
            _ => return Ok(lhs),
        };
        self.next_tok();
        let rhs = self.add_expr()?;
        if matches!(
            self.peek(),
            Tok::Lt | Tok::Gt | Tok::Le | Tok::Ge | Tok::EqEq | Tok::NotEq
        ) {
            return Err(self.error("comparisons do not chain; use `&&`".into()));
        }
        Ok(build(lhs, rhs))
    }

    fn add_expr(&mut self) -> Result<Expr, LangError> {
        let mut lhs = self.mul_expr()?;
        loop {
            if self.eat(&Tok::Plus) {
                let rhs = self.mul_expr()?;
                lhs = Expr::plus(lhs, rhs);
            } else if self.eat(&Tok::Minus) {
                let rhs = self.mul_expr()?;
                lhs = Expr::plus(lhs, Expr::times(Expr::int(-1), rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn mul_expr(&mut self) -> Result<Expr, LangError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Star) {
            let rhs = self.unary()?;
            lhs = Expr::times(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, LangError> {
        if self.eat(&Tok::Bang) {
            return Ok(Expr::not(self.unary()?));
        }
        if self.eat(&Tok::Minus) {
            if let Tok::Int(v) = *self.peek() {
                self.next_tok();
                return Ok(Expr::int(-v));
            }
            return Ok(Expr::times(Expr::int(-1), self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, LangError> {
        let pos = self.here();
        match self.next_tok() {
            Tok::Int(v) => Ok(Expr::int(v)),
            Tok::Str(label) => {
                let outcomes = self.outcomes.as_ref().ok_or_else(|| {
                    self.error_at(
                        pos,
                        "outcome label used before `outcomes` declaration".into(),
                    )
                })?;
                match outcomes.iter().position(|o| *o == label) {
                    Some(i) => Ok(Expr::int(i as i64)),
                    None => Err(LangError::Semantic(format!(
                        "undeclared outcome label \"{label}\" at {}:{}",
                        pos.line, pos.col
                    ))),
                }
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(w) if w == "true" => Ok(Expr::BoolConst { value: true }),
            Tok::Ident(w) if w == "false" => Ok(Expr::BoolConst { value: false }),
            Tok::Ident(w) if w == "len" => {
                self.expect(&Tok::LParen)?;
                let name = self.ident()?;
                self.expect(&Tok::RParen)?;
                Ok(Expr::Length { name })
            }
            Tok::Ident(w) if w == "array" => {
                self.expect(&Tok::LParen)?;
                let size = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(Expr::ArrayDeclare {
                    size: Box::new(size),
                })
            }
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                if self.eat(&Tok::LParen) {
                    let mut args = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        args.push(self.expr()?);
                        while self.eat(&Tok::Comma) {
                            args.push(self.expr()?);
                        }
                        self.expect(&Tok::RParen)?;
                    }
                    Ok(Expr::FunctionCall { name, args })
                } else if self.eat(&Tok::LBracket) {
                    let index = self.expr()?;
                    self.expect(&Tok::RBracket)?;
                    Ok(Expr::ArrayAccess {
                        name,
                        index: Box::new(index),
                    })
                } else {
                    Ok(Expr::VarRef { name })
                }
            }
            other => Err(self.error_at(pos, format!("expected expression, found {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn parses_low_middle_high() {
        let spec = parse_spec("lmh27", LMH).unwrap();
        assert_eq!(spec.outcomes, vec!["Low", "Middle", "High"]);
        assert_eq!(spec.target_dim(), 1);
        assert_eq!(spec.query_dim(), 2);
        assert_eq!(spec.evaluate_params(), vec!["q", "t"]);
        assert!(!spec.has_target_validity());
    }

    #[test]
    fn desugars_comparisons_and_minus() {
        let src = "targets t in 0..3\nqueries q in 0..3\noutcomes \"a\"\n\
                   evaluate { x = t - q; if x >= 1 { return \"a\" }; return 0 }";
        let spec = parse_spec("s", src).unwrap();
        let body = spec.function(EVALUATE).unwrap().body;
        let Stmt::Block { stmts } = body else {
            panic!()
        };
        assert_eq!(
            stmts[0],
            Stmt::Assign {
                name: "x".into(),
                value: AssignValue::Expr(Expr::plus(
                    Expr::var("t"),
                    Expr::times(Expr::int(-1), Expr::var("q"))
                )),
            }
        );
        let Stmt::If { cond, .. } = &stmts[1] else {
            panic!()
        };
        assert_eq!(*cond, Expr::not(Expr::less(Expr::var("x"), Expr::int(1))));
    }

    #[test]
    fn negative_literals_stay_constants() {
        let src = "targets t in -5..-1\nqueries q in -3..3\noutcomes \"a\"\nevaluate { y = -4; return \"a\" }";
        let spec = parse_spec("s", src).unwrap();
        assert_eq!(spec.targets[0].ranges[0], Interval::new(-5, -1));
        let Stmt::Block { stmts } = spec.function(EVALUATE).unwrap().body else {
            panic!()
        };
        assert_eq!(
            stmts[0],
            Stmt::Assign {
                name: "y".into(),
                value: AssignValue::Expr(Expr::int(-4))
            }
        );
    }

    #[test]
    fn constants_size_declarations() {
        let src = "constant N = 4\nconstant A = [3, N, 9]\ntargets t in 1..N\n\
                   queries q in 0..2\noutcomes \"lo\", \"hi\"\n\
                   evaluate { if A[q] < t { return \"lo\" } else { return \"hi\" } }";
        let spec = parse_spec("s", src).unwrap();
        assert_eq!(spec.targets[0].ranges[0], Interval::new(1, 4));
        assert_eq!(
            spec.constants()["A"],
            Value::Array(vec![Value::Int(3), Value::Int(4), Value::Int(9)])
        );
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_spec("s", "targets t in 1..3\nqueries q in 1..3 3\n").unwrap_err();
        match err {
            LangError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn undeclared_label_is_semantic_error() {
        let src = "targets t in 1..3\nqueries q in 1..3\noutcomes \"a\"\nevaluate { return \"b\" }";
        assert!(matches!(parse_spec("s", src), Err(LangError::Semantic(_))));
    }

    #[test]
    fn empty_interval_rejected() {
        assert!(parse_spec("s", "targets t in 3..1\n").is_err());
    }

    #[test]
    fn chained_comparison_rejected() {
        let src = "targets t in 1..3\nqueries q in 1..3\noutcomes \"a\"\nevaluate { if 1 < t < 3 { return \"a\" } else { return \"a\" } }";
        assert!(matches!(parse_spec("s", src), Err(LangError::Parse { .. })));
    }
}
