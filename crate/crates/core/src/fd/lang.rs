//! Parser for the constraint definition language.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PType {
    Fdv,
    Int,
    LInt,
    LFdv,
}

impl PType {
    pub fn name(self) -> &'static str {
        match self {
            PType::Fdv => "fdv",
            PType::Int => "int",
            PType::LInt => "l_int",
            PType::LFdv => "l_fdv",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: PType,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArOp {
    Add,
    Sub,
    Mul,
    /// Floor division (`/` and `/<`).
    Div,
    /// Ceiling division (`/>`).
    CeilDiv,
    Mod,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Lit(i64),
    /// A parameter used as an integer.
    Param(usize),
    MaxInt,
    Min(usize),
    Max(usize),
    Val(usize),
    Neg(Box<Expr>),
    Bin(ArOp, Box<Expr>, Box<Expr>),
    MinOf(Box<Expr>, Box<Expr>),
    MaxOf(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExtArg {
    Dom(usize),
    List(usize),
    Expr(Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub enum RangeExpr {
    Interval(Expr, Expr),
    Set(Vec<Expr>),
    Compl(Box<RangeExpr>),
    Dom(usize),
    Ext(String, Vec<ExtArg>),
    Inter(Box<RangeExpr>, Box<RangeExpr>),
    Union(Box<RangeExpr>, Box<RangeExpr>),
    /// Pointwise arithmetic with an integer: `r + e`, `r - e`, `r * e`, `r / e`.
    Pointwise(ArOp, Box<RangeExpr>, Expr),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cond {
    Cmp(CmpOp, Expr, Expr),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
    Not(Box<Cond>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Primitive {
    pub name: Option<String>,
    pub target: usize,
    pub range: RangeExpr,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Action {
    Stop(String),
    Start(Primitive),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Case {
    pub cond: Cond,
    pub actions: Vec<Action>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Start(Primitive),
    Switch(Vec<Case>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintDef {
    pub name: String,
    pub params: Vec<Param>,
    pub items: Vec<Item>,
    pub line: usize,
}

impl ConstraintDef {
    pub fn primitives(&self) -> Vec<&Primitive> {
        let mut out = Vec::new();
        for it in &self.items {
            match it {
                Item::Start(p) => out.push(p),
                Item::Switch(cases) => {
                    for c in cases {
                        for a in &c.actions {
                            if let Action::Start(p) = a {
                                out.push(p);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {msg}")]
pub struct FdSyntaxError {
    pub line: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(i64),
    Ident(String),
    Sym(&'static str),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Ident(s) => f.write_str(s),
            Tok::Sym(s) => f.write_str(s),
        }
    }
}

const SYMS: &[&str] = &[
    "..", "==", "!=", "<=", ">=", "&&", "||", "/>", "/<", "(", ")", "{", "}", ",", "~", "+", "-", "*", "/", "%", "<", ">",
    "!", "&", ":",
];

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, FdSyntaxError> {
    let b = src.as_bytes();
    let mut i = 0;
    let mut line = 1;
    let mut out = Vec::new();
    while i < b.len() {
        let c = b[i];
        if c == b'\n' {
            line += 1;
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if src[i..].starts_with("/*") {
            let end = src[i + 2..].find("*/").ok_or(FdSyntaxError { line, msg: "unterminated comment".into() })?;
            line += src[i..i + 2 + end].matches('\n').count();
            i += end + 4;
        } else if src[i..].starts_with("//") {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
        } else if c.is_ascii_digit() {
            let s = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let n = src[s..i].parse().map_err(|_| FdSyntaxError { line, msg: "integer too large".into() })?;
            out.push((Tok::Int(n), line));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let s = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[s..i].to_string()), line));
        } else {
            let sym = SYMS.iter().find(|s| src[i..].starts_with(**s));
            match sym {
                Some(s) => {
                    out.push((Tok::Sym(s), line));
                    i += s.len();
                }
                None => return Err(FdSyntaxError { line, msg: format!("unexpected character `{}`", c as char) }),
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    params: Vec<Param>,
    names: Vec<String>,
}

type PResult<T> = Result<T, FdSyntaxError>;

fn is_ext_name(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_uppercase()) && s != "Min" && s != "Max"
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).or(self.toks.last()).map(|(_, l)| *l).unwrap_or(1)
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(FdSyntaxError { line: self.line(), msg: msg.into() })
    }

    fn next(&mut self) -> PResult<Tok> {
        match self.toks.get(self.pos) {
            Some((t, _)) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => self.err("unexpected end of input"),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            match self.peek() {
                Some(t) => self.err(format!("expected `{s}`, found `{t}`")),
                None => self.err(format!("expected `{s}`")),
            }
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.next()? {
            Tok::Ident(s) => Ok(s),
            t => {
                self.pos -= 1;
                self.err(format!("expected identifier, found `{t}`"))
            }
        }
    }

    fn param(&mut self) -> PResult<usize> {
        let name = self.ident()?;
        match self.params.iter().position(|p| p.name == name) {
            Some(k) => Ok(k),
            None => {
                self.pos -= 1;
                self.err(format!("unknown identifier `{name}`"))
            }
        }
    }

    fn def(&mut self) -> PResult<ConstraintDef> {
        let line = self.line();
        let name = self.ident()?;
        self.expect_sym("(")?;
        self.params.clear();
        self.names.clear();
        loop {
            let ty = match self.ident()?.as_str() {
                "fdv" => PType::Fdv,
                "int" => PType::Int,
                "l_int" => PType::LInt,
                "l_fdv" => PType::LFdv,
                other => {
                    self.pos -= 1;
                    return self.err(format!("unknown parameter type `{other}`"));
                }
            };
            let pname = self.ident()?;
            if self.params.iter().any(|p| p.name == pname) {
                self.pos -= 1;
                return self.err(format!("duplicate parameter `{pname}`"));
            }
            self.params.push(Param { name: pname, ty });
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(")")?;
        self.expect_sym("{")?;
        let mut items = Vec::new();
        while !self.eat_sym("}") {
            if self.is_ident("start") {
                items.push(Item::Start(self.start()?));
            } else if self.is_ident("wait_switch") {
                self.pos += 1;
                items.push(Item::Switch(self.cases()?));
            } else {
                return match self.peek() {
                    Some(t) => self.err(format!("expected `start` or `wait_switch`, found `{t}`")),
                    None => self.err("unterminated definition"),
                };
            }
        }
        Ok(ConstraintDef { name, params: self.params.clone(), items, line })
    }

    fn start(&mut self) -> PResult<Primitive> {
        let line = self.line();
        self.pos += 1;
        let name = if self.eat_sym("(") {
            let n = self.ident()?;
            self.expect_sym(")")?;
            if self.names.contains(&n) {
                self.pos -= 2;
                return self.err(format!("duplicate primitive name `{n}`"));
            }
            self.names.push(n.clone());
            Some(n)
        } else {
            None
        };
        let target = self.param()?;
        if !self.is_ident("in") {
            return self.err("expected `in`");
        }
        self.pos += 1;
        let range = self.range()?;
        Ok(Primitive { name, target, range, line })
    }

    fn cases(&mut self) -> PResult<Vec<Case>> {
        let mut cases = Vec::new();
        while self.is_ident("case") {
            self.pos += 1;
            let cond = self.cond()?;
            let mut actions = Vec::new();
            loop {
                if self.is_ident("stop") {
                    self.pos += 1;
                    let n = self.ident()?;
                    if !self.names.contains(&n) {
                        self.pos -= 1;
                        return self.err(format!("stop of undeclared primitive `{n}`"));
                    }
                    actions.push(Action::Stop(n));
                } else if self.is_ident("start") {
                    actions.push(Action::Start(self.start()?));
                } else {
                    break;
                }
            }
            cases.push(Case { cond, actions });
        }
        if cases.is_empty() {
            return self.err("wait_switch without cases");
        }
        Ok(cases)
    }

    fn cond(&mut self) -> PResult<Cond> {
        let mut c = self.cond_and()?;
        while self.eat_sym("||") {
            c = Cond::Or(Box::new(c), Box::new(self.cond_and()?));
        }
        Ok(c)
    }

    fn cond_and(&mut self) -> PResult<Cond> {
        let mut c = self.cond_not()?;
        while self.eat_sym("&&") {
            c = Cond::And(Box::new(c), Box::new(self.cond_not()?));
        }
        Ok(c)
    }

    fn cond_not(&mut self) -> PResult<Cond> {
        if self.eat_sym("!") {
            return Ok(Cond::Not(Box::new(self.cond_not()?)));
        }
        let lhs = self.expr()?;
        let op = match self.next()? {
            Tok::Sym("==") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            t => {
                self.pos -= 1;
                return self.err(format!("expected comparison, found `{t}`"));
            }
        };
        let rhs = self.expr()?;
        Ok(Cond::Cmp(op, lhs, rhs))
    }

    fn range(&mut self) -> PResult<RangeExpr> {
        let mut r = self.range_inter()?;
        while self.eat_sym(":") {
            r = RangeExpr::Union(Box::new(r), Box::new(self.range_inter()?));
        }
        Ok(r)
    }

    fn range_inter(&mut self) -> PResult<RangeExpr> {
        let mut r = self.range_arith()?;
        while self.eat_sym("&") {
            r = RangeExpr::Inter(Box::new(r), Box::new(self.range_arith()?));
        }
        Ok(r)
    }

    fn range_arith(&mut self) -> PResult<RangeExpr> {
        let mut r = self.range_prim()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym("+")) => ArOp::Add,
                Some(Tok::Sym("-")) => ArOp::Sub,
                Some(Tok::Sym("*")) => ArOp::Mul,
                Some(Tok::Sym("/")) => ArOp::Div,
                _ => return Ok(r),
            };
            self.pos += 1;
            let e = self.expr_unary()?;
            r = RangeExpr::Pointwise(op, Box::new(r), e);
        }
    }

    fn range_prim(&mut self) -> PResult<RangeExpr> {
        if self.eat_sym("~") {
            return Ok(RangeExpr::Compl(Box::new(self.range_prim()?)));
        }
        if self.eat_sym("{") {
            let mut es = vec![self.expr()?];
            while self.eat_sym(",") {
                es.push(self.expr()?);
            }
            self.expect_sym("}")?;
            return Ok(RangeExpr::Set(es));
        }
        if self.is_ident("dom") && matches!(self.peek2(), Some(Tok::Sym("("))) {
            self.pos += 2;
            let v = self.param()?;
            self.expect_sym(")")?;
            return Ok(RangeExpr::Dom(v));
        }
        if let (Some(Tok::Ident(n)), Some(Tok::Sym("("))) = (self.peek(), self.peek2()) {
            if is_ext_name(n) {
                let n = n.clone();
                self.pos += 2;
                let mut args = Vec::new();
                if !self.eat_sym(")") {
                    loop {
                        args.push(self.ext_arg()?);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                    self.expect_sym(")")?;
                }
                return Ok(RangeExpr::Ext(n, args));
            }
        }
        let lo = self.expr()?;
        self.expect_sym("..")?;
        let hi = self.expr()?;
        Ok(RangeExpr::Interval(lo, hi))
    }

    fn ext_arg(&mut self) -> PResult<ExtArg> {
        if self.is_ident("dom") && matches!(self.peek2(), Some(Tok::Sym("("))) {
            self.pos += 2;
            let v = self.param()?;
            self.expect_sym(")")?;
            return Ok(ExtArg::Dom(v));
        }
        if let (Some(Tok::Ident(n)), Some(Tok::Sym(s))) = (self.peek(), self.peek2()) {
            if (*s == "," || *s == ")") && self.params.iter().any(|p| &p.name == n && matches!(p.ty, PType::LInt | PType::LFdv)) {
                return Ok(ExtArg::List(self.param()?));
            }
        }
        Ok(ExtArg::Expr(self.expr()?))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut e = self.expr_mul()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym("+")) => ArOp::Add,
                Some(Tok::Sym("-")) => ArOp::Sub,
                _ => return Ok(e),
            };
            self.pos += 1;
            e = Expr::Bin(op, Box::new(e), Box::new(self.expr_mul()?));
        }
    }

    fn expr_mul(&mut self) -> PResult<Expr> {
        let mut e = self.expr_unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym("*")) => ArOp::Mul,
                Some(Tok::Sym("/")) | Some(Tok::Sym("/<")) => ArOp::Div,
                Some(Tok::Sym("/>")) => ArOp::CeilDiv,
                Some(Tok::Sym("%")) => ArOp::Mod,
                _ => return Ok(e),
            };
            self.pos += 1;
            e = Expr::Bin(op, Box::new(e), Box::new(self.expr_unary()?));
        }
    }

    fn expr_unary(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            return Ok(Expr::Neg(Box::new(self.expr_unary()?)));
        }
        if self.eat_sym("(") {
            let e = self.expr()?;
            self.expect_sym(")")?;
            return Ok(e);
        }
        match self.next()? {
            Tok::Int(n) => Ok(Expr::Lit(n)),
            Tok::Ident(s) if s == "max_integer" => Ok(Expr::MaxInt),
            Tok::Ident(s) if matches!(s.as_str(), "min" | "max" | "val") && self.is_sym("(") => {
                self.pos += 1;
                let v = self.param()?;
                self.expect_sym(")")?;
                Ok(match s.as_str() {
                    "min" => Expr::Min(v),
                    "max" => Expr::Max(v),
                    _ => Expr::Val(v),
                })
            }
            Tok::Ident(s) if (s == "Min" || s == "Max") && self.is_sym("(") => {
                self.pos += 1;
                let a = self.expr()?;
                self.expect_sym(",")?;
                let b = self.expr()?;
                self.expect_sym(")")?;
                Ok(if s == "Min" { Expr::MinOf(Box::new(a), Box::new(b)) } else { Expr::MaxOf(Box::new(a), Box::new(b)) })
            }
            Tok::Ident(_) => {
                self.pos -= 1;
                Ok(Expr::Param(self.param()?))
            }
            t => {
                self.pos -= 1;
                self.err(format!("unexpected `{t}`"))
            }
        }
    }
}

/// Parse a sequence of constraint definitions.
pub fn parse_fd(src: &str) -> Result<Vec<ConstraintDef>, FdSyntaxError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, params: Vec::new(), names: Vec::new() };
    let mut defs = Vec::new();
    while p.peek().is_some() {
        defs.push(p.def()?);
    }
    Ok(defs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x_plus_c_eq_y() {
        let d = parse_fd(
            "x_plus_c_eq_y (fdv X, int C, fdv Y) {
               start X in min(Y) - C .. max(Y) - C        /* X = Y - C */
               start Y in min(X) + C .. max(X) + C        /* Y = X + C */
             }",
        )
        .unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].params.len(), 3);
        assert_eq!(d[0].items.len(), 2);
        let Item::Start(p) = &d[0].items[0] else { panic!() };
        assert_eq!(p.target, 0);
        assert_eq!(
            p.range,
            RangeExpr::Interval(
                Expr::Bin(ArOp::Sub, Box::new(Expr::Min(2)), Box::new(Expr::Param(1))),
                Expr::Bin(ArOp::Sub, Box::new(Expr::Max(2)), Box::new(Expr::Param(1)))
            )
        );
    }

    #[test]
    fn errors() {
        assert!(parse_fd("f(fdv X) { start X in 0..Y }").unwrap_err().msg.contains("unknown identifier"));
        assert!(parse_fd("f(real X) { }").unwrap_err().msg.contains("unknown parameter type"));
        assert!(parse_fd("f(fdv X) { wait_switch case min(X) > 1 stop c1 }").unwrap_err().msg.contains("undeclared"));
        assert!(parse_fd("f(fdv X) { start X in 0..").is_err());
    }
}
