//! WAM instructions and their term representation.

use std::fmt;

use crate::reader::{write_term, OpTable};
use crate::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reg {
    X(usize),
    Y(usize),
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reg::X(i) => write!(f, "x({i})"),
            Reg::Y(i) => write!(f, "y({i})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredInd {
    pub name: String,
    pub arity: usize,
}

impl PredInd {
    pub fn new(name: &str, arity: usize) -> Self {
        PredInd { name: name.to_string(), arity }
    }

    pub fn to_term(&self) -> Term {
        Term::compound("/", vec![Term::atom(&self.name), Term::Int(self.arity as i64)])
    }

    pub fn from_term(t: &Term) -> Option<PredInd> {
        match t {
            Term::Compound(f, a) if f == "/" && a.len() == 2 => {
                let arity = a[1].as_int().filter(|&n| n >= 0)?;
                Some(PredInd { name: a[0].as_atom()?.to_string(), arity: arity as usize })
            }
            _ => None,
        }
    }
}

impl fmt::Display for PredInd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&write_term(&self.to_term(), &OpTable::default(), true))
    }
}

/// Branch target of `switch_on_term`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Label(usize),
    Fail,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instr {
    GetVariable(Reg, usize),
    GetValue(Reg, usize),
    GetAtom(String, usize),
    GetInteger(i64, usize),
    GetFloat(f64, usize),
    GetNil(usize),
    GetList(usize),
    GetStructure(PredInd, usize),
    PutVariable(Reg, usize),
    PutValue(Reg, usize),
    PutAtom(String, usize),
    PutInteger(i64, usize),
    PutFloat(f64, usize),
    PutNil(usize),
    PutList(usize),
    PutStructure(PredInd, usize),
    UnifyVariable(Reg),
    UnifyValue(Reg),
    UnifyAtom(String),
    UnifyInteger(i64),
    UnifyFloat(f64),
    UnifyNil,
    UnifyVoid(usize),
    Allocate(usize),
    Deallocate,
    Call(PredInd),
    Execute(PredInd),
    Proceed,
    Fail,
    Label(usize),
    /// Targets for var, atom, integer, list, structure.
    SwitchOnTerm([Target; 5]),
    SwitchOnAtom(Vec<(String, usize)>),
    SwitchOnInteger(Vec<(i64, usize)>),
    SwitchOnStructure(Vec<(PredInd, usize)>),
    TryMeElse(usize),
    RetryMeElse(usize),
    TrustMeElseFail,
    Try(usize),
    Retry(usize),
    Trust(usize),
    LoadCutLevel(usize),
    Cut(Reg),
    /// Inlined test on registers, e.g. `call_c('Pl_Blt_Var',[x(0)])`.
    CallC(String, Vec<Reg>),
}

fn reg_term(r: &Reg) -> Term {
    match r {
        Reg::X(i) => Term::compound("x", vec![Term::Int(*i as i64)]),
        Reg::Y(i) => Term::compound("y", vec![Term::Int(*i as i64)]),
    }
}

fn reg_from(t: &Term) -> Option<Reg> {
    let n = t.args().first()?.as_int().filter(|&n| n >= 0)? as usize;
    match t.functor()? {
        ("x", 1) => Some(Reg::X(n)),
        ("y", 1) => Some(Reg::Y(n)),
        _ => None,
    }
}

fn int(n: usize) -> Term {
    Term::Int(n as i64)
}

fn pair(k: Term, l: usize) -> Term {
    Term::compound(",", vec![k, int(l)])
}

impl Instr {
    pub fn to_term(&self) -> Term {
        use Instr::*;
        let c = |f: &str, args: Vec<Term>| Term::compound(f, args);
        match self {
            GetVariable(r, i) => c("get_variable", vec![reg_term(r), int(*i)]),
            GetValue(r, i) => c("get_value", vec![reg_term(r), int(*i)]),
            GetAtom(a, i) => c("get_atom", vec![Term::atom(a), int(*i)]),
            GetInteger(n, i) => c("get_integer", vec![Term::Int(*n), int(*i)]),
            GetFloat(x, i) => c("get_float", vec![Term::Float(*x), int(*i)]),
            GetNil(i) => c("get_nil", vec![int(*i)]),
            GetList(i) => c("get_list", vec![int(*i)]),
            GetStructure(p, i) => c("get_structure", vec![p.to_term(), int(*i)]),
            PutVariable(r, i) => c("put_variable", vec![reg_term(r), int(*i)]),
            PutValue(r, i) => c("put_value", vec![reg_term(r), int(*i)]),
            PutAtom(a, i) => c("put_atom", vec![Term::atom(a), int(*i)]),
            PutInteger(n, i) => c("put_integer", vec![Term::Int(*n), int(*i)]),
            PutFloat(x, i) => c("put_float", vec![Term::Float(*x), int(*i)]),
            PutNil(i) => c("put_nil", vec![int(*i)]),
            PutList(i) => c("put_list", vec![int(*i)]),
            PutStructure(p, i) => c("put_structure", vec![p.to_term(), int(*i)]),
            UnifyVariable(r) => c("unify_variable", vec![reg_term(r)]),
            UnifyValue(r) => c("unify_value", vec![reg_term(r)]),
            UnifyAtom(a) => c("unify_atom", vec![Term::atom(a)]),
            UnifyInteger(n) => c("unify_integer", vec![Term::Int(*n)]),
            UnifyFloat(x) => c("unify_float", vec![Term::Float(*x)]),
            UnifyNil => Term::atom("unify_nil"),
            UnifyVoid(n) => c("unify_void", vec![int(*n)]),
            Allocate(n) => c("allocate", vec![int(*n)]),
            Deallocate => Term::atom("deallocate"),
            Call(p) => c("call", vec![p.to_term()]),
            Execute(p) => c("execute", vec![p.to_term()]),
            Proceed => Term::atom("proceed"),
            Fail => Term::atom("fail"),
            Label(l) => c("label", vec![int(*l)]),
            SwitchOnTerm(ts) => c(
                "switch_on_term",
                ts.iter()
                    .map(|t| match t {
                        Target::Label(l) => int(*l),
                        Target::Fail => Term::atom("fail"),
                    })
                    .collect(),
            ),
            SwitchOnAtom(tab) => {
                c("switch_on_atom", vec![Term::list(tab.iter().map(|(a, l)| pair(Term::atom(a), *l)).collect())])
            }
            SwitchOnInteger(tab) => {
                c("switch_on_integer", vec![Term::list(tab.iter().map(|(n, l)| pair(Term::Int(*n), *l)).collect())])
            }
            SwitchOnStructure(tab) => {
                c("switch_on_structure", vec![Term::list(tab.iter().map(|(p, l)| pair(p.to_term(), *l)).collect())])
            }
            TryMeElse(l) => c("try_me_else", vec![int(*l)]),
            RetryMeElse(l) => c("retry_me_else", vec![int(*l)]),
            TrustMeElseFail => Term::atom("trust_me_else_fail"),
            Try(l) => c("try", vec![int(*l)]),
            Retry(l) => c("retry", vec![int(*l)]),
            Trust(l) => c("trust", vec![int(*l)]),
            LoadCutLevel(i) => c("load_cut_level", vec![int(*i)]),
            Cut(r) => c("cut", vec![reg_term(r)]),
            CallC(name, regs) => c("call_c", vec![Term::atom(name), Term::list(regs.iter().map(reg_term).collect())]),
        }
    }

    pub fn from_term(t: &Term) -> Option<Instr> {
        use Instr::*;
        let (name, _) = t.functor()?;
        let a = t.args();
        let idx = |k: usize| -> Option<usize> { a.get(k)?.as_int().filter(|&n| n >= 0).map(|n| n as usize) };
        let atom = |k: usize| -> Option<String> { a.get(k)?.as_atom().map(str::to_string) };
        let float = |k: usize| -> Option<f64> {
            match a.get(k)? {
                Term::Float(x) => Some(*x),
                _ => None,
            }
        };
        let table = |k: usize| -> Option<Vec<(Term, usize)>> {
            a.get(k)?
                .list_items()?
                .into_iter()
                .map(|p| match p {
                    Term::Compound(f, kv) if f == "," && kv.len() == 2 => {
                        Some((kv[0].clone(), kv[1].as_int().filter(|&n| n >= 0)? as usize))
                    }
                    _ => None,
                })
                .collect()
        };
        Some(match (name, a.len()) {
            ("get_variable", 2) => GetVariable(reg_from(&a[0])?, idx(1)?),
            ("get_value", 2) => GetValue(reg_from(&a[0])?, idx(1)?),
            ("get_atom", 2) => GetAtom(atom(0)?, idx(1)?),
            ("get_integer", 2) => GetInteger(a[0].as_int()?, idx(1)?),
            ("get_float", 2) => GetFloat(float(0)?, idx(1)?),
            ("get_nil", 1) => GetNil(idx(0)?),
            ("get_list", 1) => GetList(idx(0)?),
            ("get_structure", 2) => GetStructure(PredInd::from_term(&a[0])?, idx(1)?),
            ("put_variable", 2) => PutVariable(reg_from(&a[0])?, idx(1)?),
            ("put_value", 2) => PutValue(reg_from(&a[0])?, idx(1)?),
            ("put_atom", 2) => PutAtom(atom(0)?, idx(1)?),
            ("put_integer", 2) => PutInteger(a[0].as_int()?, idx(1)?),
            ("put_float", 2) => PutFloat(float(0)?, idx(1)?),
            ("put_nil", 1) => PutNil(idx(0)?),
            ("put_list", 1) => PutList(idx(0)?),
            ("put_structure", 2) => PutStructure(PredInd::from_term(&a[0])?, idx(1)?),
            ("unify_variable", 1) => UnifyVariable(reg_from(&a[0])?),
            ("unify_value", 1) => UnifyValue(reg_from(&a[0])?),
            ("unify_atom", 1) => UnifyAtom(atom(0)?),
            ("unify_integer", 1) => UnifyInteger(a[0].as_int()?),
            ("unify_float", 1) => UnifyFloat(float(0)?),
            ("unify_nil", 0) => UnifyNil,
            ("unify_void", 1) => UnifyVoid(idx(0)?),
            ("allocate", 1) => Allocate(idx(0)?),
            ("deallocate", 0) => Deallocate,
            ("call", 1) => Call(PredInd::from_term(&a[0])?),
            ("execute", 1) => Execute(PredInd::from_term(&a[0])?),
            ("proceed", 0) => Proceed,
            ("fail", 0) => Fail,
            ("label", 1) => Label(idx(0)?),
            ("switch_on_term", 5) => {
                let mut ts = [Target::Fail; 5];
                for (k, slot) in ts.iter_mut().enumerate() {
                    *slot = match &a[k] {
                        Term::Atom(f) if f == "fail" => Target::Fail,
                        _ => Target::Label(idx(k)?),
                    };
                }
                SwitchOnTerm(ts)
            }
            ("switch_on_atom", 1) => {
                SwitchOnAtom(table(0)?.into_iter().map(|(k, l)| Some((k.as_atom()?.to_string(), l))).collect::<Option<_>>()?)
            }
            ("switch_on_integer", 1) => {
                SwitchOnInteger(table(0)?.into_iter().map(|(k, l)| Some((k.as_int()?, l))).collect::<Option<_>>()?)
            }
            ("switch_on_structure", 1) => {
                SwitchOnStructure(table(0)?.into_iter().map(|(k, l)| Some((PredInd::from_term(&k)?, l))).collect::<Option<_>>()?)
            }
            ("try_me_else", 1) => TryMeElse(idx(0)?),
            ("retry_me_else", 1) => RetryMeElse(idx(0)?),
            ("trust_me_else_fail", 0) => TrustMeElseFail,
            ("try", 1) => Try(idx(0)?),
            ("retry", 1) => Retry(idx(0)?),
            ("trust", 1) => Trust(idx(0)?),
            ("load_cut_level", 1) => LoadCutLevel(idx(0)?),
            ("cut", 1) => Cut(reg_from(&a[0])?),
            ("call_c", 2) => CallC(atom(0)?, a[1].list_items()?.into_iter().map(reg_from).collect::<Option<_>>()?),
            _ => return None,
        })
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&write_term(&self.to_term(), &OpTable::default(), true))
    }
}
