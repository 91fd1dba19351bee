//! Clause normalization: flatten bodies, classify goals and move control
//! constructs into auxiliary predicates.

use std::collections::HashSet;

use crate::term::{Term, VarGen};

use super::CompileError;

#[derive(Clone, Debug, PartialEq)]
pub enum Goal {
    Call(String, Vec<Term>),
    Unify(Term, Term),
    /// Inline type test: name of the runtime routine and its argument.
    Test(&'static str, Term),
    Cut(Term),
    Fail,
}

impl Goal {
    pub fn is_call(&self) -> bool {
        matches!(self, Goal::Call(..))
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Goal::Call(_, args) => args.iter().collect(),
            Goal::Unify(a, b) => vec![a, b],
            Goal::Test(_, a) | Goal::Cut(a) => vec![a],
            Goal::Fail => vec![],
        }
    }
}

#[derive(Clone, Debug)]
pub struct NormClause {
    /// Head arguments; the cut-level variable, when present, is appended.
    pub head: Vec<Term>,
    pub arity: usize,
    pub has_cut: bool,
    pub body: Vec<Goal>,
}

/// An auxiliary predicate produced while normalizing a clause.
#[derive(Clone, Debug)]
pub struct AuxPred {
    pub name: String,
    pub arity: usize,
    pub clauses: Vec<Term>,
}

pub struct Normalizer<'a> {
    pub gen: &'a mut VarGen,
    pub inline: bool,
    pub aux: Vec<AuxPred>,
    pub parent: String,
    pub counter: &'a mut usize,
}

const TESTS: &[(&str, &str)] =
    &[("var", "Pl_Blt_Var"), ("nonvar", "Pl_Blt_Non_Var"), ("atom", "Pl_Blt_Atom"), ("integer", "Pl_Blt_Integer")];

pub fn split_clause(t: &Term) -> (&Term, Option<&Term>) {
    match t {
        Term::Compound(f, a) if f == ":-" && a.len() == 2 => (&a[0], Some(&a[1])),
        _ => (t, None),
    }
}

fn is_control(t: &Term) -> bool {
    matches!(t.functor(), Some((";", 2)) | Some(("->", 2)) | Some(("\\+", 1)))
}

/// Replace cuts that are transparent to the enclosing clause by `'$cut'(cv)`.
fn cut_to(t: &Term, cv: &Term) -> Term {
    match t {
        Term::Atom(a) if a == "!" => Term::compound("$cut", vec![cv.clone()]),
        Term::Compound(f, a) if a.len() == 2 && (f == "," || f == ";") => {
            Term::compound(f, vec![cut_to(&a[0], cv), cut_to(&a[1], cv)])
        }
        Term::Compound(f, a) if a.len() == 2 && f == "->" => {
            Term::compound(f, vec![a[0].clone(), cut_to(&a[1], cv)])
        }
        _ => t.clone(),
    }
}

fn contains_cut(t: &Term) -> bool {
    match t {
        Term::Atom(a) => a == "!",
        Term::Compound(f, a) if a.len() == 2 && (f == "," || f == ";") => a.iter().any(contains_cut),
        Term::Compound(f, a) if a.len() == 2 && f == "->" => contains_cut(&a[1]),
        _ => false,
    }
}

fn conj(goals: Vec<Term>) -> Term {
    let mut it = goals.into_iter().rev();
    let last = it.next().unwrap_or_else(|| Term::atom("true"));
    it.fold(last, |acc, g| Term::compound(",", vec![g, acc]))
}

fn flatten<'t>(t: &'t Term, out: &mut Vec<&'t Term>) {
    match t {
        Term::Compound(f, a) if f == "," && a.len() == 2 => {
            flatten(&a[0], out);
            flatten(&a[1], out);
        }
        _ => out.push(t),
    }
}

impl Normalizer<'_> {
    pub fn clause(&mut self, t: &Term) -> Result<NormClause, CompileError> {
        let (head, body) = split_clause(t);
        let arity = match head {
            Term::Atom(_) => 0,
            Term::Compound(_, a) => a.len(),
            _ => return Err(CompileError::Head(head.to_string())),
        };
        let body = body.cloned().unwrap_or_else(|| Term::atom("true"));
        let mut items = Vec::new();
        flatten(&body, &mut items);

        let needs_cv = items.iter().any(|g| {
            matches!(g, Term::Atom(a) if a == "!")
                || g.is_functor("$get_cut_level", 1)
                || (is_control(g) && contains_cut(g))
        });
        let cv = if needs_cv { Some(self.gen.fresh("$cut")) } else { None };
        let mut head_args: Vec<Term> = head.args().to_vec();
        if let Some(cv) = &cv {
            head_args.push(cv.clone());
        }

        let mut goals = Vec::new();
        for (k, g) in items.iter().enumerate() {
            self.goal(g, k, &items, &head_args, cv.as_ref(), &mut goals)?;
        }
        Ok(NormClause { head: head_args, arity, has_cut: cv.is_some(), body: goals })
    }

    fn goal(
        &mut self,
        g: &Term,
        pos: usize,
        items: &[&Term],
        head: &[Term],
        cv: Option<&Term>,
        out: &mut Vec<Goal>,
    ) -> Result<(), CompileError> {
        match g {
            Term::Var(_) => out.push(Goal::Call("call".into(), vec![g.clone()])),
            Term::Int(_) | Term::Float(_) => return Err(CompileError::Body(g.to_string())),
            Term::Atom(a) if a == "true" => {}
            Term::Atom(a) if a == "fail" || a == "false" => out.push(Goal::Fail),
            Term::Atom(a) if a == "!" => out.push(Goal::Cut(cv.expect("cut variable").clone())),
            Term::Compound(f, a) if f == "$cut" && a.len() == 1 => out.push(Goal::Cut(a[0].clone())),
            Term::Compound(f, a) if f == "$get_cut_level" && a.len() == 1 => {
                out.push(Goal::Unify(a[0].clone(), cv.expect("cut variable").clone()))
            }
            Term::Compound(f, a) if f == "=" && a.len() == 2 && self.inline => {
                out.push(Goal::Unify(a[0].clone(), a[1].clone()))
            }
            Term::Compound(f, a) if a.len() == 1 && self.inline && TESTS.iter().any(|(n, _)| n == f) => {
                let routine = TESTS.iter().find(|(n, _)| n == f).unwrap().1;
                out.push(Goal::Test(routine, a[0].clone()))
            }
            t if is_control(t) => {
                let aux = self.aux_call(t, pos, items, head, cv)?;
                out.push(aux);
            }
            Term::Atom(a) => out.push(Goal::Call(a.clone(), vec![])),
            Term::Compound(f, a) => out.push(Goal::Call(f.clone(), a.clone())),
        }
        Ok(())
    }

    /// Build an auxiliary predicate for a control construct and return the
    /// goal calling it.
    fn aux_call(
        &mut self,
        t: &Term,
        pos: usize,
        items: &[&Term],
        head: &[Term],
        cv: Option<&Term>,
    ) -> Result<Goal, CompileError> {
        let mut outside: HashSet<usize> = HashSet::new();
        for h in head {
            outside.extend(h.vars().into_iter().map(|v| v.id));
        }
        for (k, g) in items.iter().enumerate() {
            if k != pos {
                outside.extend(g.vars().into_iter().map(|v| v.id));
            }
        }
        let uses_parent_cut = contains_cut(t);
        let body = match cv {
            Some(cv) if uses_parent_cut => cut_to(t, cv),
            _ => t.clone(),
        };
        let mut args: Vec<Term> =
            t.vars().into_iter().filter(|v| outside.contains(&v.id)).map(Term::Var).collect();
        if uses_parent_cut {
            if let Some(cv) = cv {
                if !args.contains(cv) {
                    args.push(cv.clone());
                }
            }
        }
        *self.counter += 1;
        let name = format!("${}_$aux{}", self.parent, self.counter);
        let head_t = Term::compound(&name, args.clone());
        let cut = Term::atom("!");
        let bodies: Vec<Term> = match body.functor() {
            Some(("\\+", 1)) => {
                vec![conj(vec![body.args()[0].clone(), cut.clone(), Term::atom("fail")]), Term::atom("true")]
            }
            Some(("->", 2)) => {
                let a = body.args();
                vec![conj(vec![a[0].clone(), cut.clone(), a[1].clone()])]
            }
            _ => {
                let mut out = Vec::new();
                let mut cur = &body;
                loop {
                    match cur {
                        Term::Compound(f, a) if f == ";" && a.len() == 2 => {
                            out.push(branch(&a[0]));
                            cur = &a[1];
                        }
                        other => {
                            out.push(branch(other));
                            break;
                        }
                    }
                }
                out
            }
        };
        let clauses = bodies.into_iter().map(|b| Term::compound(":-", vec![head_t.clone(), b])).collect();
        self.aux.push(AuxPred { name: name.clone(), arity: args.len(), clauses });
        Ok(Goal::Call(name, args))
    }
}

fn branch(t: &Term) -> Term {
    match t {
        Term::Compound(f, a) if f == "->" && a.len() == 2 => conj(vec![a[0].clone(), Term::atom("!"), a[1].clone()]),
        _ => t.clone(),
    }
}
