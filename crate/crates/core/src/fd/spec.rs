//! Compilation of constraint definitions into propagator specs.

use std::collections::HashMap;
use std::rc::Rc;

use thiserror::Error;

use super::lang::{Action, ArOp, CmpOp, Cond, ConstraintDef, Expr, ExtArg, Item, PType, Param, Primitive, RangeExpr};
use super::range::{Range, MAX_INTEGER};

/// Indexical kinds a primitive can be woken on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Trig {
    Min,
    Max,
    Dom,
    Val,
}

impl Trig {
    pub fn name(self) -> &'static str {
        match self {
            Trig::Min => "min",
            Trig::Max => "max",
            Trig::Dom => "dom",
            Trig::Val => "val",
        }
    }
}

/// Values handed to external range functions.
#[derive(Clone, Debug, PartialEq)]
pub enum ExtVal {
    Int(i64),
    Range(Range),
    Ints(Rc<[i64]>),
    Doms(Vec<Range>),
}

pub type ExtFn = fn(&[ExtVal]) -> Range;

#[derive(Clone, Default)]
pub struct Externals {
    fns: Vec<(String, usize, ExtFn)>,
}

impl Externals {
    pub fn with_builtins() -> Self {
        let mut e = Externals::default();
        e.register("Pl_Fd_Element_I", 1, element_i).unwrap();
        e.register("Pl_Fd_Element_I_To_V", 2, element_i_to_v).unwrap();
        e.register("Pl_Fd_Element_V_To_I", 2, element_v_to_i).unwrap();
        e
    }

    pub fn register(&mut self, name: &str, arity: usize, f: ExtFn) -> Result<(), FdCompileError> {
        if self.fns.iter().any(|(n, _, _)| n == name) {
            return Err(FdCompileError::DuplicateExternal(name.to_string()));
        }
        self.fns.push((name.to_string(), arity, f));
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Option<(usize, usize)> {
        self.fns.iter().position(|(n, _, _)| n == name).map(|k| (k, self.fns[k].1))
    }

    pub fn call(&self, id: usize, args: &[ExtVal]) -> Range {
        (self.fns[id].2)(args)
    }
}

fn ints(v: &ExtVal) -> &[i64] {
    match v {
        ExtVal::Ints(l) => l,
        _ => &[],
    }
}

fn range(v: &ExtVal) -> Range {
    match v {
        ExtVal::Range(r) => r.clone(),
        ExtVal::Int(n) => Range::single(*n),
        _ => Range::Empty,
    }
}

/// `1..length(L)`.
pub fn element_i(args: &[ExtVal]) -> Range {
    Range::interval(1, ints(&args[0]).len() as i64)
}

/// `{ L[j] : j in dom(I) }`.
pub fn element_i_to_v(args: &[ExtVal]) -> Range {
    let (i, l) = (range(&args[0]), ints(&args[1]));
    Range::from_values(i.values().take_while(|&j| j <= l.len() as i64).filter(|&j| j >= 1).map(|j| l[j as usize - 1]))
}

/// `{ j : L[j] in dom(V) }`.
pub fn element_v_to_i(args: &[ExtVal]) -> Range {
    let (v, l) = (range(&args[0]), ints(&args[1]));
    Range::from_values(l.iter().enumerate().filter(|(_, x)| v.contains(**x)).map(|(j, _)| j as i64 + 1))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FdCompileError {
    #[error("{def}: parameter `{param}` is {found}, {expected} required")]
    Type { def: String, param: String, found: &'static str, expected: &'static str },
    #[error("{def}: unknown range function {name}")]
    UnknownExternal { def: String, name: String },
    #[error("{def}: {name} expects {expected} arguments")]
    ExternalArity { def: String, name: String, expected: usize },
    #[error("range function {0} already registered")]
    DuplicateExternal(String),
}

/// Range evaluation program, in postfix form over an integer and a range stack.
#[derive(Clone, Debug, PartialEq)]
pub enum Ins {
    Int(i64),
    Param(usize),
    Min(usize),
    Max(usize),
    Val(usize),
    Neg,
    Ar(ArOp),
    MinOf,
    MaxOf,
    Interval,
    Set(usize),
    Compl,
    Dom(usize),
    Point(ArOp),
    Inter,
    Union,
    Ext(usize, Rc<[ExtKind]>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtKind {
    Dom(usize),
    List(usize),
    Int,
}

#[derive(Clone, Debug)]
pub struct PrimSpec {
    pub name: Option<String>,
    pub target: usize,
    pub range: RangeExpr,
    pub prog: Vec<Ins>,
    /// (parameter, kind) pairs; list parameters stand for each of their variables.
    pub triggers: Vec<(usize, Trig)>,
    /// Parameters read through `val`: evaluation waits until all are fixed.
    pub delayed: Vec<usize>,
    /// Started at install time (false for primitives started by a switch case).
    pub initial: bool,
}

#[derive(Clone, Debug)]
pub struct CaseSpec {
    pub cond: Cond,
    pub stops: Vec<usize>,
    pub starts: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SwitchSpec {
    pub cases: Vec<CaseSpec>,
    pub triggers: Vec<(usize, Trig)>,
}

#[derive(Clone, Debug)]
pub struct Spec {
    pub name: String,
    pub params: Vec<Param>,
    pub prims: Vec<PrimSpec>,
    pub switches: Vec<SwitchSpec>,
}

impl Spec {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    /// Source-like rendering of primitive `k`, e.g. `X in 0..max(Y)`.
    pub fn show_prim(&self, k: usize) -> String {
        let p = &self.prims[k];
        format!("{} in {}", self.params[p.target].name, show_range(&p.range, &self.params))
    }
}

/// Integer parameters, variable domains and list arguments seen by a range program.
pub trait EvalCtx {
    fn int(&self, p: usize) -> i64;
    fn dom(&self, p: usize) -> &Range;
    fn list(&self, p: usize) -> ExtVal;
}

pub fn arith(op: ArOp, a: i64, b: i64) -> i64 {
    match op {
        ArOp::Add => a.saturating_add(b),
        ArOp::Sub => a.saturating_sub(b),
        ArOp::Mul => a.saturating_mul(b),
        ArOp::Div if b == 0 => MAX_INTEGER,
        ArOp::Div => a.div_euclid(b),
        ArOp::CeilDiv if b == 0 => MAX_INTEGER,
        ArOp::CeilDiv => -((-a).div_euclid(b)),
        ArOp::Mod if b == 0 => 0,
        ArOp::Mod => a.rem_euclid(b),
    }
}

fn pointwise(op: ArOp, r: &Range, e: i64) -> Range {
    match op {
        ArOp::Add => r.shift(e),
        ArOp::Sub => r.shift(e.saturating_neg()),
        ArOp::Mul => r.scale(e),
        _ => r.div(e),
    }
}

fn dmin(c: &dyn EvalCtx, p: usize) -> i64 {
    c.dom(p).min().unwrap_or(0)
}

fn dmax(c: &dyn EvalCtx, p: usize) -> i64 {
    c.dom(p).max().unwrap_or(0)
}

/// Direct evaluation of an expression over the AST.
pub fn eval_expr(e: &Expr, c: &dyn EvalCtx) -> i64 {
    match e {
        Expr::Lit(n) => *n,
        Expr::Param(p) => c.int(*p),
        Expr::MaxInt => MAX_INTEGER,
        Expr::Min(p) | Expr::Val(p) => dmin(c, *p),
        Expr::Max(p) => dmax(c, *p),
        Expr::Neg(a) => eval_expr(a, c).saturating_neg(),
        Expr::Bin(op, a, b) => arith(*op, eval_expr(a, c), eval_expr(b, c)),
        Expr::MinOf(a, b) => eval_expr(a, c).min(eval_expr(b, c)),
        Expr::MaxOf(a, b) => eval_expr(a, c).max(eval_expr(b, c)),
    }
}

/// Direct evaluation of a range over the AST.
pub fn eval_range(r: &RangeExpr, c: &dyn EvalCtx, ext: &Externals) -> Range {
    match r {
        RangeExpr::Interval(a, b) => Range::interval(eval_expr(a, c), eval_expr(b, c)),
        RangeExpr::Set(es) => Range::from_values(es.iter().map(|e| eval_expr(e, c))),
        RangeExpr::Compl(a) => eval_range(a, c, ext).complement(),
        RangeExpr::Dom(p) => c.dom(*p).clone(),
        RangeExpr::Ext(name, args) => {
            let vals: Vec<ExtVal> = args
                .iter()
                .map(|a| match a {
                    ExtArg::Dom(p) => ExtVal::Range(c.dom(*p).clone()),
                    ExtArg::List(p) => c.list(*p),
                    ExtArg::Expr(e) => ExtVal::Int(eval_expr(e, c)),
                })
                .collect();
            match ext.lookup(name) {
                Some((id, _)) => ext.call(id, &vals),
                None => Range::Empty,
            }
        }
        RangeExpr::Inter(a, b) => eval_range(a, c, ext).intersect(&eval_range(b, c, ext)),
        RangeExpr::Union(a, b) => eval_range(a, c, ext).union(&eval_range(b, c, ext)),
        RangeExpr::Pointwise(op, a, e) => pointwise(*op, &eval_range(a, c, ext), eval_expr(e, c)),
    }
}

pub fn eval_cond(k: &Cond, c: &dyn EvalCtx) -> bool {
    match k {
        Cond::Cmp(op, a, b) => {
            let (a, b) = (eval_expr(a, c), eval_expr(b, c));
            match op {
                CmpOp::Eq => a == b,
                CmpOp::Ne => a != b,
                CmpOp::Lt => a < b,
                CmpOp::Le => a <= b,
                CmpOp::Gt => a > b,
                CmpOp::Ge => a >= b,
            }
        }
        Cond::And(a, b) => eval_cond(a, c) && eval_cond(b, c),
        Cond::Or(a, b) => eval_cond(a, c) || eval_cond(b, c),
        Cond::Not(a) => !eval_cond(a, c),
    }
}

/// Run a compiled range program.
pub fn run_prog(prog: &[Ins], c: &dyn EvalCtx, ext: &Externals) -> Range {
    let mut is: Vec<i64> = Vec::with_capacity(8);
    let mut rs: Vec<Range> = Vec::with_capacity(4);
    for ins in prog {
        match ins {
            Ins::Int(n) => is.push(*n),
            Ins::Param(p) => is.push(c.int(*p)),
            Ins::Min(p) | Ins::Val(p) => is.push(dmin(c, *p)),
            Ins::Max(p) => is.push(dmax(c, *p)),
            Ins::Neg => {
                let a = is.pop().unwrap();
                is.push(a.saturating_neg());
            }
            Ins::Ar(op) => {
                let b = is.pop().unwrap();
                let a = is.pop().unwrap();
                is.push(arith(*op, a, b));
            }
            Ins::MinOf | Ins::MaxOf => {
                let b = is.pop().unwrap();
                let a = is.pop().unwrap();
                is.push(if matches!(ins, Ins::MinOf) { a.min(b) } else { a.max(b) });
            }
            Ins::Interval => {
                let b = is.pop().unwrap();
                let a = is.pop().unwrap();
                rs.push(Range::interval(a, b));
            }
            Ins::Set(n) => {
                let vals = is.split_off(is.len() - n);
                rs.push(Range::from_values(vals));
            }
            Ins::Compl => {
                let r = rs.pop().unwrap();
                rs.push(r.complement());
            }
            Ins::Dom(p) => rs.push(c.dom(*p).clone()),
            Ins::Point(op) => {
                let e = is.pop().unwrap();
                let r = rs.pop().unwrap();
                rs.push(pointwise(*op, &r, e));
            }
            Ins::Inter | Ins::Union => {
                let b = rs.pop().unwrap();
                let a = rs.pop().unwrap();
                rs.push(if matches!(ins, Ins::Inter) { a.intersect(&b) } else { a.union(&b) });
            }
            Ins::Ext(id, kinds) => {
                let nints = kinds.iter().filter(|k| matches!(k, ExtKind::Int)).count();
                let mut ints = is.split_off(is.len() - nints).into_iter();
                let vals: Vec<ExtVal> = kinds
                    .iter()
                    .map(|k| match k {
                        ExtKind::Dom(p) => ExtVal::Range(c.dom(*p).clone()),
                        ExtKind::List(p) => c.list(*p),
                        ExtKind::Int => ExtVal::Int(ints.next().unwrap()),
                    })
                    .collect();
                rs.push(ext.call(*id, &vals));
            }
        }
    }
    rs.pop().unwrap_or(Range::Empty)
}

struct Compiler<'a> {
    def: &'a ConstraintDef,
    ext: &'a Externals,
}

impl Compiler<'_> {
    fn want(&self, p: usize, ok: &[PType], expected: &'static str) -> Result<(), FdCompileError> {
        let prm = &self.def.params[p];
        if ok.contains(&prm.ty) {
            Ok(())
        } else {
            Err(FdCompileError::Type {
                def: self.def.name.clone(),
                param: prm.name.clone(),
                found: prm.ty.name(),
                expected,
            })
        }
    }

    fn expr(&self, e: &Expr, out: &mut Vec<Ins>, trig: &mut Vec<(usize, Trig)>) -> Result<(), FdCompileError> {
        match e {
            Expr::Lit(n) => out.push(Ins::Int(*n)),
            Expr::MaxInt => out.push(Ins::Int(MAX_INTEGER)),
            Expr::Param(p) => {
                self.want(*p, &[PType::Int], "int")?;
                out.push(Ins::Param(*p));
            }
            Expr::Min(p) | Expr::Max(p) | Expr::Val(p) => {
                self.want(*p, &[PType::Fdv], "fdv")?;
                let (ins, t) = match e {
                    Expr::Min(_) => (Ins::Min(*p), Trig::Min),
                    Expr::Max(_) => (Ins::Max(*p), Trig::Max),
                    _ => (Ins::Val(*p), Trig::Val),
                };
                out.push(ins);
                trig.push((*p, t));
            }
            Expr::Neg(a) => {
                self.expr(a, out, trig)?;
                out.push(Ins::Neg);
            }
            Expr::Bin(op, a, b) => {
                self.expr(a, out, trig)?;
                self.expr(b, out, trig)?;
                out.push(Ins::Ar(*op));
            }
            Expr::MinOf(a, b) | Expr::MaxOf(a, b) => {
                self.expr(a, out, trig)?;
                self.expr(b, out, trig)?;
                out.push(if matches!(e, Expr::MinOf(..)) { Ins::MinOf } else { Ins::MaxOf });
            }
        }
        Ok(())
    }

    fn range(&self, r: &RangeExpr, out: &mut Vec<Ins>, trig: &mut Vec<(usize, Trig)>) -> Result<(), FdCompileError> {
        match r {
            RangeExpr::Interval(a, b) => {
                self.expr(a, out, trig)?;
                self.expr(b, out, trig)?;
                out.push(Ins::Interval);
            }
            RangeExpr::Set(es) => {
                for e in es {
                    self.expr(e, out, trig)?;
                }
                out.push(Ins::Set(es.len()));
            }
            RangeExpr::Compl(a) => {
                self.range(a, out, trig)?;
                out.push(Ins::Compl);
            }
            RangeExpr::Dom(p) => {
                self.want(*p, &[PType::Fdv], "fdv")?;
                out.push(Ins::Dom(*p));
                trig.push((*p, Trig::Dom));
            }
            RangeExpr::Inter(a, b) | RangeExpr::Union(a, b) => {
                self.range(a, out, trig)?;
                self.range(b, out, trig)?;
                out.push(if matches!(r, RangeExpr::Inter(..)) { Ins::Inter } else { Ins::Union });
            }
            RangeExpr::Pointwise(op, a, e) => {
                self.range(a, out, trig)?;
                self.expr(e, out, trig)?;
                out.push(Ins::Point(*op));
            }
            RangeExpr::Ext(name, args) => {
                let def = self.def.name.clone();
                let (id, arity) = self
                    .ext
                    .lookup(name)
                    .ok_or_else(|| FdCompileError::UnknownExternal { def: def.clone(), name: name.clone() })?;
                if arity != args.len() {
                    return Err(FdCompileError::ExternalArity { def, name: name.clone(), expected: arity });
                }
                let mut kinds = Vec::new();
                for a in args {
                    match a {
                        ExtArg::Dom(p) => {
                            self.want(*p, &[PType::Fdv], "fdv")?;
                            trig.push((*p, Trig::Dom));
                            kinds.push(ExtKind::Dom(*p));
                        }
                        ExtArg::List(p) => {
                            self.want(*p, &[PType::LInt, PType::LFdv], "a list")?;
                            if self.def.params[*p].ty == PType::LFdv {
                                trig.push((*p, Trig::Dom));
                            }
                            kinds.push(ExtKind::List(*p));
                        }
                        ExtArg::Expr(e) => {
                            self.expr(e, out, trig)?;
                            kinds.push(ExtKind::Int);
                        }
                    }
                }
                out.push(Ins::Ext(id, kinds.into()));
            }
        }
        Ok(())
    }

    fn prim(&self, p: &Primitive, initial: bool) -> Result<PrimSpec, FdCompileError> {
        self.want(p.target, &[PType::Fdv], "fdv")?;
        let mut prog = Vec::new();
        let mut trig = Vec::new();
        self.range(&p.range, &mut prog, &mut trig)?;
        trig.sort();
        trig.dedup();
        let mut delayed: Vec<usize> = trig.iter().filter(|(_, t)| *t == Trig::Val).map(|(v, _)| *v).collect();
        delayed.dedup();
        Ok(PrimSpec { name: p.name.clone(), target: p.target, range: p.range.clone(), prog, triggers: trig, delayed, initial })
    }

    fn cond_triggers(&self, c: &Cond, trig: &mut Vec<(usize, Trig)>) -> Result<(), FdCompileError> {
        match c {
            Cond::Cmp(_, a, b) => {
                let mut scratch = Vec::new();
                self.expr(a, &mut scratch, trig)?;
                self.expr(b, &mut scratch, trig)
            }
            Cond::And(a, b) | Cond::Or(a, b) => {
                self.cond_triggers(a, trig)?;
                self.cond_triggers(b, trig)
            }
            Cond::Not(a) => self.cond_triggers(a, trig),
        }
    }
}

/// Compile a checked definition into a propagator spec.
pub fn compile_def(def: &ConstraintDef, ext: &Externals) -> Result<Spec, FdCompileError> {
    let c = Compiler { def, ext };
    let mut prims = Vec::new();
    let mut switches = Vec::new();
    let mut named: HashMap<String, usize> = HashMap::new();
    for it in &def.items {
        match it {
            Item::Start(p) => {
                if let Some(n) = &p.name {
                    named.insert(n.clone(), prims.len());
                }
                prims.push(c.prim(p, true)?);
            }
            Item::Switch(cases) => {
                let mut triggers = Vec::new();
                let mut specs = Vec::new();
                for case in cases {
                    c.cond_triggers(&case.cond, &mut triggers)?;
                    let mut stops = Vec::new();
                    let mut starts = Vec::new();
                    for a in &case.actions {
                        match a {
                            Action::Stop(n) => stops.push(named[n]),
                            Action::Start(p) => {
                                if let Some(n) = &p.name {
                                    named.insert(n.clone(), prims.len());
                                }
                                starts.push(prims.len());
                                prims.push(c.prim(p, false)?);
                            }
                        }
                    }
                    specs.push(CaseSpec { cond: case.cond.clone(), stops, starts });
                }
                triggers.sort();
                triggers.dedup();
                switches.push(SwitchSpec { cases: specs, triggers });
            }
        }
    }
    Ok(Spec { name: def.name.clone(), params: def.params.clone(), prims, switches })
}

fn show_expr(e: &Expr, ps: &[Param], top: bool) -> String {
    let s = match e {
        Expr::Lit(n) => return n.to_string(),
        Expr::Param(p) => return ps[*p].name.clone(),
        Expr::MaxInt => return "max_integer".into(),
        Expr::Min(p) => return format!("min({})", ps[*p].name),
        Expr::Max(p) => return format!("max({})", ps[*p].name),
        Expr::Val(p) => return format!("val({})", ps[*p].name),
        Expr::MinOf(a, b) => return format!("Min({},{})", show_expr(a, ps, true), show_expr(b, ps, true)),
        Expr::MaxOf(a, b) => return format!("Max({},{})", show_expr(a, ps, true), show_expr(b, ps, true)),
        Expr::Neg(a) => format!("-{}", show_expr(a, ps, false)),
        Expr::Bin(op, a, b) => {
            let o = match op {
                ArOp::Add => "+",
                ArOp::Sub => "-",
                ArOp::Mul => "*",
                ArOp::Div => "/",
                ArOp::CeilDiv => "/>",
                ArOp::Mod => "%",
            };
            format!("{}{o}{}", show_expr(a, ps, false), show_expr(b, ps, false))
        }
    };
    if top {
        s
    } else {
        format!("({s})")
    }
}

pub fn show_range(r: &RangeExpr, ps: &[Param]) -> String {
    match r {
        RangeExpr::Interval(a, b) => format!("{}..{}", show_expr(a, ps, true), show_expr(b, ps, true)),
        RangeExpr::Set(es) => format!("{{{}}}", es.iter().map(|e| show_expr(e, ps, true)).collect::<Vec<_>>().join(",")),
        RangeExpr::Compl(a) => format!("~{}", show_range(a, ps)),
        RangeExpr::Dom(p) => format!("dom({})", ps[*p].name),
        RangeExpr::Ext(n, args) => {
            let a: Vec<String> = args
                .iter()
                .map(|a| match a {
                    ExtArg::Dom(p) => format!("dom({})", ps[*p].name),
                    ExtArg::List(p) => ps[*p].name.clone(),
                    ExtArg::Expr(e) => show_expr(e, ps, true),
                })
                .collect();
            format!("{n}({})", a.join(","))
        }
        RangeExpr::Inter(a, b) => format!("({}&{})", show_range(a, ps), show_range(b, ps)),
        RangeExpr::Union(a, b) => format!("({}:{})", show_range(a, ps), show_range(b, ps)),
        RangeExpr::Pointwise(op, a, e) => {
            let o = match op {
                ArOp::Add => "+",
                ArOp::Sub => "-",
                ArOp::Mul => "*",
                _ => "/",
            };
            format!("{}{o}{}", show_range(a, ps), show_expr(e, ps, false))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::lang::parse_fd;
    use super::*;

    fn one(src: &str) -> Spec {
        let d = parse_fd(src).unwrap();
        compile_def(&d[0], &Externals::with_builtins()).unwrap()
    }

    #[test]
    fn x_plus_c_eq_y_triggers() {
        let s = one("x_plus_c_eq_y (fdv X, int C, fdv Y) { start X in min(Y) - C .. max(Y) - C start Y in min(X) + C .. max(X) + C }");
        assert_eq!(s.prims[0].triggers, vec![(2, Trig::Min), (2, Trig::Max)]);
        assert_eq!(s.prims[1].triggers, vec![(0, Trig::Min), (0, Trig::Max)]);
    }

    #[test]
    fn val_is_delayed() {
        let s = one("x_neq_y(fdv X, fdv Y) { start X in ~{val(Y)} }");
        assert_eq!(s.prims[0].delayed, vec![1]);
        assert_eq!(s.prims[0].triggers, vec![(1, Trig::Val)]);
    }

    #[test]
    fn type_errors() {
        let d = parse_fd("f(fdv X, int C) { start X in 0..min(C) }").unwrap();
        assert!(matches!(compile_def(&d[0], &Externals::default()), Err(FdCompileError::Type { .. })));
        let d = parse_fd("f(fdv X, l_int L) { start X in Foo(L) }").unwrap();
        assert!(matches!(compile_def(&d[0], &Externals::default()), Err(FdCompileError::UnknownExternal { .. })));
    }

    #[test]
    fn duplicate_external() {
        let mut e = Externals::with_builtins();
        assert!(e.register("Pl_Fd_Element_I", 1, element_i).is_err());
        assert!(e.register("My_Fn", 1, element_i).is_ok());
    }

    #[test]
    fn element_functions() {
        let l = ExtVal::Ints(vec![3, 5, 3].into());
        assert_eq!(element_i_to_v(&[ExtVal::Range(Range::interval(1, 3)), l.clone()]), Range::from_values([3, 5]));
        assert_eq!(element_v_to_i(&[ExtVal::Range(Range::single(5)), l]), Range::single(2));
        assert_eq!(element_i(&[ExtVal::Ints(vec![7].into())]), Range::interval(1, 1));
    }
}
