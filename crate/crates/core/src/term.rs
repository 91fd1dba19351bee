//! Source-level Prolog terms.

use std::collections::HashMap;
use std::fmt;

/// A variable occurring in a read term. Identity is the `id`; the name is
/// kept for diagnostics and for printing bindings.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Var {
    pub id: usize,
    pub name: String,
}

#[derive(Clone, Debug)]
pub enum Term {
    Var(Var),
    Atom(String),
    Int(i64),
    Float(f64),
    Compound(String, Vec<Term>),
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Term::Var(a), Term::Var(b)) => a.id == b.id,
            (Term::Atom(a), Term::Atom(b)) => a == b,
            (Term::Int(a), Term::Int(b)) => a == b,
            (Term::Float(a), Term::Float(b)) => a.to_bits() == b.to_bits(),
            (Term::Compound(f, xs), Term::Compound(g, ys)) => f == g && xs == ys,
            _ => false,
        }
    }
}

impl Term {
    pub fn atom(s: &str) -> Term {
        Term::Atom(s.to_string())
    }

    pub fn compound(f: &str, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::Atom(f.to_string())
        } else {
            Term::Compound(f.to_string(), args)
        }
    }

    pub fn nil() -> Term {
        Term::Atom("[]".to_string())
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::Compound(".".to_string(), vec![head, tail])
    }

    pub fn list_from(items: Vec<Term>, tail: Term) -> Term {
        items.into_iter().rev().fold(tail, |acc, t| Term::cons(t, acc))
    }

    pub fn list(items: Vec<Term>) -> Term {
        Term::list_from(items, Term::nil())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_callable(&self) -> bool {
        matches!(self, Term::Atom(_) | Term::Compound(..))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Term::Atom(_) | Term::Int(_) | Term::Float(_))
    }

    /// Name and arity of a callable term.
    pub fn functor(&self) -> Option<(&str, usize)> {
        match self {
            Term::Atom(a) => Some((a, 0)),
            Term::Compound(f, args) => Some((f, args.len())),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, args) => args,
            _ => &[],
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Term::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Term::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_functor(&self, name: &str, arity: usize) -> bool {
        self.functor() == Some((name, arity))
    }

    /// Elements of a proper list, or `None` for partial/improper lists.
    pub fn list_items(&self) -> Option<Vec<&Term>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::Atom(a) if a == "[]" => return Some(out),
                Term::Compound(f, args) if f == "." && args.len() == 2 => {
                    out.push(&args[0]);
                    cur = &args[1];
                }
                _ => return None,
            }
        }
    }

    /// Variables in depth-first, left-to-right order of first occurrence.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.iter().any(|w| w.id == v.id) {
                    out.push(v.clone());
                }
            }
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    /// Structural equality up to a consistent bijective renaming of variables.
    pub fn variant_of(&self, other: &Term) -> bool {
        fn go(a: &Term, b: &Term, fwd: &mut HashMap<usize, usize>, back: &mut HashMap<usize, usize>) -> bool {
            match (a, b) {
                (Term::Var(x), Term::Var(y)) => {
                    let f = *fwd.entry(x.id).or_insert(y.id);
                    let g = *back.entry(y.id).or_insert(x.id);
                    f == y.id && g == x.id
                }
                (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                    f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(x, y, fwd, back))
                }
                (Term::Float(x), Term::Float(y)) => x == y || (x.is_nan() && y.is_nan()),
                _ => a == b,
            }
        }
        go(self, other, &mut HashMap::new(), &mut HashMap::new())
    }

    /// Replace variables according to `map`, leaving others untouched.
    pub fn substitute(&self, map: &HashMap<usize, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(&v.id).cloned().unwrap_or_else(|| self.clone()),
            Term::Compound(f, args) => Term::Compound(f.clone(), args.iter().map(|a| a.substitute(map)).collect()),
            _ => self.clone(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ops = crate::reader::OpTable::default();
        f.write_str(&crate::reader::write_term(self, &ops, true))
    }
}

/// Hands out fresh variable identities.
#[derive(Debug, Default, Clone)]
pub struct VarGen {
    next: usize,
}

impl VarGen {
    pub fn new() -> Self {
        VarGen { next: 0 }
    }

    pub fn starting_at(next: usize) -> Self {
        VarGen { next }
    }

    pub fn fresh(&mut self, name: &str) -> Term {
        let id = self.next;
        self.next += 1;
        Term::Var(Var { id, name: name.to_string() })
    }

    pub fn peek(&self) -> usize {
        self.next
    }
}
