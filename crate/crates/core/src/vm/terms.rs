//! Heap term construction, inspection, copying and ordering.

use std::cmp::Ordering;
use std::collections::HashMap;

use super::machine::{Machine, Res};
use super::word::{atoms, Atom, STerm, Word};
use crate::term::{Term, Var};

impl Machine {
    pub fn atom(&mut self, s: &str) -> Word {
        Word::Atm(self.atoms.intern(s))
    }

    pub fn new_struct(&mut self, f: Atom, args: &[Word]) -> Word {
        if args.is_empty() {
            return Word::Atm(f);
        }
        let h = self.heap.len();
        self.heap.push(Word::Fun(f, args.len() as u32));
        for &a in args {
            let a = self.storable(self.deref(a));
            self.heap.push(a);
        }
        Word::Stc(h)
    }

    pub fn cons(&mut self, head: Word, tail: Word) -> Word {
        let h = self.heap.len();
        let (hd, tl) = (self.storable(self.deref(head)), self.storable(self.deref(tail)));
        self.heap.push(hd);
        self.heap.push(tl);
        Word::Lst(h)
    }

    pub fn make_list(&mut self, items: &[Word], tail: Word) -> Word {
        let mut acc = tail;
        for &w in items.iter().rev() {
            acc = self.cons(w, acc);
        }
        acc
    }

    /// Functor name and arity of a callable or atomic term.
    pub fn functor_of(&self, w: Word) -> Option<(Atom, usize)> {
        match self.deref(w) {
            Word::Atm(a) => Some((a, 0)),
            Word::Lst(_) => Some((atoms::DOT, 2)),
            Word::Stc(a) => match self.heap[a] {
                Word::Fun(f, n) => Some((f, n as usize)),
                _ => None,
            },
            _ => None,
        }
    }

    /// Argument `i` (0-based) of a compound term.
    pub fn arg_of(&self, w: Word, i: usize) -> Word {
        match self.deref(w) {
            Word::Lst(a) => self.cell(a + i),
            Word::Stc(a) => self.cell(a + 1 + i),
            w => w,
        }
    }

    /// Proper list items; None for partial or improper lists.
    pub fn list_items(&self, w: Word) -> Option<Vec<Word>> {
        let mut out = Vec::new();
        let mut cur = self.deref(w);
        loop {
            match cur {
                Word::Atm(atoms::NIL) => return Some(out),
                Word::Lst(a) => {
                    out.push(self.cell(a));
                    cur = self.deref(self.cell(a + 1));
                }
                _ => return None,
            }
        }
    }

    /// Like `list_items` but raising ISO errors.
    pub fn list_arg(&mut self, w: Word) -> Res<Vec<Word>> {
        match self.list_items(w) {
            Some(v) => Ok(v),
            None => {
                let mut cur = self.deref(w);
                while let Word::Lst(a) = cur {
                    cur = self.deref(self.cell(a + 1));
                }
                if matches!(cur, Word::Ref(_)) {
                    Err(self.inst_error())
                } else {
                    Err(self.type_error("list", w))
                }
            }
        }
    }

    pub fn int_arg(&mut self, w: Word) -> Res<i64> {
        match self.deref(w) {
            Word::Int(n) => Ok(n),
            Word::Ref(_) | Word::Fdv(_) => Err(self.inst_error()),
            w => Err(self.type_error("integer", w)),
        }
    }

    pub fn atom_arg(&mut self, w: Word) -> Res<Atom> {
        match self.deref(w) {
            Word::Atm(a) => Ok(a),
            Word::Ref(_) | Word::Fdv(_) => Err(self.inst_error()),
            w => Err(self.type_error("atom", w)),
        }
    }

    pub fn callable_arg(&mut self, w: Word) -> Res<(Atom, usize)> {
        match self.deref(w) {
            Word::Ref(_) | Word::Fdv(_) => Err(self.inst_error()),
            w => match self.functor_of(w) {
                Some(f) => Ok(f),
                None => Err(self.type_error("callable", w)),
            },
        }
    }

    pub fn is_var(&self, w: Word) -> bool {
        matches!(self.deref(w), Word::Ref(_) | Word::Fdv(_))
    }

    // ---- heap-independent copies ----

    pub fn to_sterm(&self, w: Word) -> STerm {
        let mut map = HashMap::new();
        self.to_sterm_map(w, &mut map)
    }

    /// Copy out a term, numbering variables through `map` (cell -> index).
    pub fn to_sterm_map(&self, w: Word, map: &mut HashMap<usize, u32>) -> STerm {
        match self.deref(w) {
            Word::Ref(a) => {
                let n = map.len() as u32;
                STerm::Var(*map.entry(a).or_insert(n))
            }
            Word::Fdv(v) => {
                let a = self.fd.vars[v as usize].cell;
                let n = map.len() as u32;
                STerm::Var(*map.entry(a).or_insert(n))
            }
            Word::Atm(a) => STerm::Atm(a),
            Word::Int(n) => STerm::Int(n),
            Word::Flt(f) => STerm::Flt(f),
            Word::Lst(a) => {
                let h = self.to_sterm_map(self.cell(a), map);
                let t = self.to_sterm_map(self.cell(a + 1), map);
                STerm::Str(atoms::DOT, vec![h, t].into())
            }
            Word::Stc(a) => {
                let Word::Fun(f, n) = self.heap[a] else { return STerm::Atm(atoms::NIL) };
                let args: Vec<STerm> = (1..=n as usize).map(|i| self.to_sterm_map(self.cell(a + i), map)).collect();
                STerm::Str(f, args.into())
            }
            Word::Code(c) => STerm::Int(c as i64),
            Word::Tbl(t) => STerm::Int(t as i64),
            Word::Fun(f, _) => STerm::Atm(f),
        }
    }

    /// Build a copy of `t` on the heap; `vars` maps variable numbers to
    /// words and is extended with fresh variables as needed.
    pub fn put_sterm(&mut self, t: &STerm, vars: &mut Vec<Word>) -> Word {
        match t {
            STerm::Var(n) => {
                let n = *n as usize;
                while vars.len() <= n {
                    let v = self.new_var();
                    vars.push(v);
                }
                vars[n]
            }
            STerm::Atm(a) => Word::Atm(*a),
            STerm::Int(n) => Word::Int(*n),
            STerm::Flt(f) => Word::Flt(*f),
            STerm::Str(f, args) => {
                let ws: Vec<Word> = args.iter().map(|a| self.put_sterm(a, vars)).collect();
                if *f == atoms::DOT && ws.len() == 2 {
                    self.cons(ws[0], ws[1])
                } else {
                    self.new_struct(*f, &ws)
                }
            }
        }
    }

    pub fn copy_term(&mut self, w: Word) -> Word {
        let s = self.to_sterm(w);
        self.put_sterm(&s, &mut Vec::new())
    }

    // ---- source terms ----

    /// Build a reader term on the heap; `vars` maps source variable ids.
    pub fn put_term(&mut self, t: &Term, vars: &mut HashMap<usize, Word>) -> Word {
        match t {
            Term::Var(v) => {
                if v.name == "_" {
                    return self.new_var();
                }
                if let Some(&w) = vars.get(&v.id) {
                    return w;
                }
                let w = self.new_var();
                vars.insert(v.id, w);
                w
            }
            Term::Atom(a) => self.atom(a),
            Term::Int(n) => Word::Int(*n),
            Term::Float(f) => Word::Flt(*f),
            Term::Compound(f, args) => {
                let ws: Vec<Word> = args.iter().map(|a| self.put_term(a, vars)).collect();
                if f == "." && ws.len() == 2 {
                    self.cons(ws[0], ws[1])
                } else {
                    let f = self.atoms.intern(f);
                    self.new_struct(f, &ws)
                }
            }
        }
    }

    /// Copy a heap term into a reader term for printing. Unbound variables
    /// are named `_G<cell>` unless `names` gives a name; FD variables print
    /// as `_#<cell>(<domain>)`.
    pub fn to_term(&self, w: Word, names: &HashMap<usize, String>) -> Term {
        match self.deref(w) {
            Word::Ref(a) => {
                let name = names.get(&a).cloned().unwrap_or_else(|| format!("_G{a}"));
                Term::Var(Var { id: a, name })
            }
            Word::Fdv(v) => {
                let x = &self.fd.vars[v as usize];
                let name = format!("_#{}({})", x.cell, x.dom);
                Term::Var(Var { id: x.cell, name })
            }
            Word::Atm(a) => Term::Atom(self.atoms.name(a).to_string()),
            Word::Int(n) => Term::Int(n),
            Word::Flt(f) => Term::Float(f),
            Word::Lst(a) => Term::Compound(".".into(), vec![self.to_term(self.cell(a), names), self.to_term(self.cell(a + 1), names)]),
            Word::Stc(a) => {
                let Word::Fun(f, n) = self.heap[a] else { return Term::atom("?") };
                let args = (1..=n as usize).map(|i| self.to_term(self.cell(a + i), names)).collect();
                Term::Compound(self.atoms.name(f).to_string(), args)
            }
            Word::Code(c) => Term::Int(c as i64),
            Word::Tbl(t) => Term::Int(t as i64),
            Word::Fun(f, _) => Term::Atom(self.atoms.name(f).to_string()),
        }
    }

    pub fn sterm_to_term(&self, t: &STerm) -> Term {
        match t {
            STerm::Var(n) => Term::Var(Var { id: *n as usize, name: format!("_{n}") }),
            STerm::Atm(a) => Term::Atom(self.atoms.name(*a).to_string()),
            STerm::Int(n) => Term::Int(*n),
            STerm::Flt(f) => Term::Float(*f),
            STerm::Str(f, args) => {
                Term::Compound(self.atoms.name(*f).to_string(), args.iter().map(|a| self.sterm_to_term(a)).collect())
            }
        }
    }

    // ---- standard order ----

    fn order_class(w: Word) -> u8 {
        match w {
            Word::Ref(_) | Word::Fdv(_) => 0,
            Word::Flt(_) | Word::Int(_) => 1,
            Word::Atm(_) => 3,
            _ => 4,
        }
    }

    fn var_addr(&self, w: Word) -> usize {
        match w {
            Word::Ref(a) => a,
            Word::Fdv(v) => self.fd.vars[v as usize].cell,
            _ => 0,
        }
    }

    pub fn compare(&self, a: Word, b: Word) -> Ordering {
        let (a, b) = (self.deref(a), self.deref(b));
        let (ca, cb) = (Self::order_class(a), Self::order_class(b));
        if ca != cb {
            return ca.cmp(&cb);
        }
        match (a, b) {
            (Word::Int(x), Word::Int(y)) => x.cmp(&y),
            (Word::Flt(x), Word::Flt(y)) => x.total_cmp(&y),
            (Word::Int(x), Word::Flt(y)) => match (x as f64).partial_cmp(&y) {
                Some(Ordering::Equal) | None => Ordering::Greater,
                Some(o) => o,
            },
            (Word::Flt(x), Word::Int(y)) => match x.partial_cmp(&(y as f64)) {
                Some(Ordering::Equal) | None => Ordering::Less,
                Some(o) => o,
            },
            (Word::Atm(x), Word::Atm(y)) => self.atoms.name(x).cmp(self.atoms.name(y)),
            _ if ca == 0 => self.var_addr(a).cmp(&self.var_addr(b)),
            _ => {
                let (fa, na) = self.functor_of(a).unwrap_or((atoms::NIL, 0));
                let (fb, nb) = self.functor_of(b).unwrap_or((atoms::NIL, 0));
                na.cmp(&nb)
                    .then_with(|| self.atoms.name(fa).cmp(self.atoms.name(fb)))
                    .then_with(|| {
                        for i in 0..na {
                            let o = self.compare(self.arg_of(a, i), self.arg_of(b, i));
                            if o != Ordering::Equal {
                                return o;
                            }
                        }
                        Ordering::Equal
                    })
            }
        }
    }

    /// Structural identity (`==`).
    pub fn identical(&self, a: Word, b: Word) -> bool {
        self.compare(a, b) == Ordering::Equal
    }
}
