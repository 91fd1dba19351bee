//! Tagged words, the atom table and heap-independent term copies.

use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom(pub u32);

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Word {
    /// Reference to a heap cell; a cell referring to itself is unbound.
    Ref(usize),
    Atm(Atom),
    Int(i64),
    Flt(f64),
    Lst(usize),
    Stc(usize),
    /// Functor cell heading a structure.
    Fun(Atom, u32),
    /// Finite-domain variable handle.
    Fdv(u32),
    Code(usize),
    /// Switch table handle.
    Tbl(u32),
}

impl Word {
    pub fn tag_name(&self) -> &'static str {
        match self {
            Word::Ref(_) => "REF",
            Word::Atm(_) => "ATM",
            Word::Int(_) => "INT",
            Word::Flt(_) => "FLT",
            Word::Lst(_) => "LST",
            Word::Stc(_) => "STC",
            Word::Fun(..) => "FUN",
            Word::Fdv(_) => "FDV",
            Word::Code(_) => "CODE",
            Word::Tbl(_) => "TBL",
        }
    }
}

#[derive(Default, Debug, Clone)]
pub struct AtomTable {
    names: Vec<String>,
    index: HashMap<String, Atom>,
}

impl AtomTable {
    pub fn intern(&mut self, s: &str) -> Atom {
        if let Some(&a) = self.index.get(s) {
            return a;
        }
        let a = Atom(self.names.len() as u32);
        self.names.push(s.to_string());
        self.index.insert(s.to_string(), a);
        a
    }

    pub fn lookup(&self, s: &str) -> Option<Atom> {
        self.index.get(s).copied()
    }

    pub fn name(&self, a: Atom) -> &str {
        &self.names[a.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Atoms every machine interns first, in this order.
pub mod atoms {
    use super::Atom;
    pub const NIL: Atom = Atom(0);
    pub const DOT: Atom = Atom(1);
    pub const TRUE: Atom = Atom(2);
    pub const FAIL: Atom = Atom(3);
    pub const COMMA: Atom = Atom(4);
    pub const SEMI: Atom = Atom(5);
    pub const ARROW: Atom = Atom(6);
    pub const NOT: Atom = Atom(7);
    pub const CUT: Atom = Atom(8);
    pub const NECK: Atom = Atom(9);
    pub const CALL: Atom = Atom(10);
    pub const ERROR: Atom = Atom(11);
    pub const MINUS: Atom = Atom(12);
    pub const SLASH: Atom = Atom(13);
    pub const CURLY: Atom = Atom(14);
    pub const EMPTY: Atom = Atom(15);
    pub const USER: Atom = Atom(16);
    pub const EQ: Atom = Atom(17);
    pub const FALSE: Atom = Atom(18);
    pub const PLUS: Atom = Atom(19);
    pub const STAR: Atom = Atom(20);
    pub const COLON: Atom = Atom(21);
    pub const PREDEFINED: &[&str] =
        &["[]", ".", "true", "fail", ",", ";", "->", "\\+", "!", ":-", "call", "error", "-", "/", "{}", "", "user", "=", "false", "+", "*", ":"];
}

impl AtomTable {
    pub fn with_predefined() -> Self {
        let mut t = AtomTable::default();
        for s in atoms::PREDEFINED {
            t.intern(s);
        }
        t
    }
}

/// A term copied out of the heap, with variables numbered from zero.
#[derive(Clone, Debug, PartialEq)]
pub enum STerm {
    Var(u32),
    Atm(Atom),
    Int(i64),
    Flt(f64),
    Str(Atom, Box<[STerm]>),
}

impl STerm {
    pub fn functor(&self) -> Option<(Atom, usize)> {
        match self {
            STerm::Atm(a) => Some((*a, 0)),
            STerm::Str(f, args) => Some((*f, args.len())),
            _ => None,
        }
    }

    pub fn var_count(&self) -> u32 {
        match self {
            STerm::Var(n) => n + 1,
            STerm::Str(_, a) => a.iter().map(|t| t.var_count()).max().unwrap_or(0),
            _ => 0,
        }
    }
}
