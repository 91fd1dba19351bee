//! Code generation for one normalized clause.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::instr::{Instr, PredInd, Reg};
use super::normalize::{Goal, NormClause};
use super::{CompileError, CompileOpts};
use crate::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Var(usize),
    /// Head argument not yet matched, or an argument already loaded for a call.
    Arg,
    Scratch,
}

struct Gen<'o> {
    opts: &'o CompileOpts,
    code: Vec<Instr>,
    regs: BTreeMap<usize, Slot>,
    loc: HashMap<usize, Reg>,
    seen: HashSet<usize>,
    perm: HashMap<usize, usize>,
    total: HashMap<usize, usize>,
    remaining: HashMap<usize, usize>,
    /// Per chunk: variable -> argument position in the call ending the chunk.
    prefs: Vec<HashMap<usize, usize>>,
    floors: Vec<usize>,
    chunk: usize,
    put_floor: Option<usize>,
    deferred: Vec<(usize, Term)>,
}

fn var_id(t: &Term) -> Option<usize> {
    match t {
        Term::Var(v) => Some(v.id),
        _ => None,
    }
}

fn count_vars(t: &Term, out: &mut HashMap<usize, usize>, order: &mut Vec<usize>) {
    match t {
        Term::Var(v) => {
            let c = out.entry(v.id).or_insert(0);
            if *c == 0 {
                order.push(v.id);
            }
            *c += 1;
        }
        Term::Compound(_, a) => a.iter().for_each(|x| count_vars(x, out, order)),
        _ => {}
    }
}

fn struct_ind(t: &Term) -> PredInd {
    let (f, n) = t.functor().expect("compound");
    PredInd::new(f, n)
}

fn is_list_cell(t: &Term) -> bool {
    t.is_functor(".", 2)
}

pub fn compile_clause(cl: &NormClause, opts: &CompileOpts) -> Result<Vec<Instr>, CompileError> {
    // Variable statistics, chunk membership and permanent classification.
    let mut total = HashMap::new();
    let mut order = Vec::new();
    let mut chunks: HashMap<usize, HashSet<usize>> = HashMap::new();
    let mut note = |t: &Term, chunk: usize, total: &mut HashMap<usize, usize>, order: &mut Vec<usize>| {
        count_vars(t, total, order);
        for v in t.vars() {
            chunks.entry(v.id).or_default().insert(chunk);
        }
    };
    for a in &cl.head {
        note(a, 0, &mut total, &mut order);
    }
    let mut chunk = 0;
    let mut prefs = vec![HashMap::new()];
    let mut floors = vec![cl.head.len()];
    for g in &cl.body {
        for t in g.terms() {
            note(t, chunk, &mut total, &mut order);
        }
        if let Goal::Call(_, args) = g {
            let p = prefs.last_mut().unwrap();
            for (i, a) in args.iter().enumerate() {
                if let Some(v) = var_id(a) {
                    p.entry(v).or_insert(i);
                }
            }
            if chunk > 0 {
                *floors.last_mut().unwrap() = args.len();
            }
            chunk += 1;
            prefs.push(HashMap::new());
            floors.push(0);
        }
    }
    let mut perm = HashMap::new();
    for v in &order {
        if chunks.get(v).is_some_and(|c| c.len() > 1) {
            let n = perm.len();
            perm.insert(*v, n);
        }
    }
    let calls: Vec<usize> = cl.body.iter().enumerate().filter(|(_, g)| g.is_call()).map(|(k, _)| k).collect();
    let ends_in_fail = cl.body.iter().position(|g| *g == Goal::Fail);
    let effective_len = ends_in_fail.map(|k| k + 1).unwrap_or(cl.body.len());
    let env = !perm.is_empty()
        || calls.iter().any(|&k| k < effective_len && (k + 1 < effective_len || !opts.lco));

    let mut g = Gen {
        opts,
        code: Vec::new(),
        regs: BTreeMap::new(),
        loc: HashMap::new(),
        seen: HashSet::new(),
        perm,
        remaining: total.clone(),
        total,
        prefs,
        floors,
        chunk: 0,
        put_floor: None,
        deferred: Vec::new(),
    };
    if env {
        g.code.push(Instr::Allocate(g.perm.len()));
    }
    g.head(&cl.head);

    let mut finished = false;
    for (k, goal) in cl.body.iter().enumerate() {
        match goal {
            Goal::Fail => {
                g.code.push(Instr::Fail);
                finished = true;
                break;
            }
            Goal::Cut(v) => {
                let id = var_id(v).ok_or_else(|| CompileError::Body(format!("'$cut'({v})")))?;
                let r = *g.loc.get(&id).ok_or_else(|| CompileError::Body("cut to unbound level".into()))?;
                g.code.push(Instr::Cut(r));
                g.use_var(id);
            }
            Goal::Test(routine, t) => g.test(routine, t),
            Goal::Unify(a, b) => g.unify(a, b),
            Goal::Call(name, args) => {
                g.put_args(args);
                let p = PredInd::new(name, args.len());
                if k + 1 == cl.body.len() && opts.lco {
                    if env {
                        g.code.push(Instr::Deallocate);
                    }
                    g.code.push(Instr::Execute(p));
                    finished = true;
                } else {
                    g.code.push(Instr::Call(p));
                    g.regs.clear();
                    g.chunk += 1;
                }
            }
        }
    }
    if !finished {
        if env {
            g.code.push(Instr::Deallocate);
        }
        g.code.push(Instr::Proceed);
    }
    Ok(g.code)
}

impl Gen<'_> {
    fn is_perm(&self, v: usize) -> bool {
        self.perm.contains_key(&v)
    }

    fn is_void(&self, v: usize) -> bool {
        !self.is_perm(v) && self.total.get(&v) == Some(&1)
    }

    fn floor(&self) -> usize {
        self.put_floor.unwrap_or_else(|| self.floors.get(self.chunk).copied().unwrap_or(0))
    }

    fn alloc(&mut self, pref: Option<usize>, slot: Slot) -> usize {
        if let Some(p) = pref.filter(|_| self.opts.reg_opt) {
            if let std::collections::btree_map::Entry::Vacant(e) = self.regs.entry(p) {
                e.insert(slot);
                return p;
            }
        }
        let mut k = self.floor();
        while self.regs.contains_key(&k) {
            k += 1;
        }
        self.regs.insert(k, slot);
        k
    }

    fn pref(&self, v: usize) -> Option<usize> {
        self.prefs.get(self.chunk).and_then(|p| p.get(&v)).copied()
    }

    fn use_var(&mut self, v: usize) {
        let r = self.remaining.entry(v).or_insert(1);
        *r = r.saturating_sub(1);
        if *r == 0 && !self.is_perm(v) {
            if let Some(Reg::X(k)) = self.loc.get(&v) {
                if self.regs.get(k) == Some(&Slot::Var(v)) {
                    self.regs.remove(k);
                }
            }
        }
    }

    fn head(&mut self, args: &[Term]) {
        let mut home: HashMap<usize, usize> = HashMap::new();
        for i in 0..args.len() {
            self.regs.insert(i, Slot::Arg);
        }
        for (i, a) in args.iter().enumerate() {
            if let Some(v) = var_id(a) {
                if let std::collections::hash_map::Entry::Vacant(e) = home.entry(v) {
                    e.insert(i);
                    self.loc.insert(v, Reg::X(i));
                    self.seen.insert(v);
                    self.regs.insert(i, Slot::Var(v));
                }
            }
        }
        let mut ord: Vec<usize> = (0..args.len()).collect();
        if self.opts.reorder {
            ord.sort_by_key(|&i| args[i].is_var());
        }
        for i in ord {
            match var_id(&args[i]) {
                Some(v) if home.get(&v) == Some(&i) => {
                    if let Some(&j) = self.perm.get(&v) {
                        self.code.push(Instr::GetVariable(Reg::Y(j), i));
                        self.loc.insert(v, Reg::Y(j));
                        self.regs.remove(&i);
                    } else if !self.opts.reg_opt && !self.is_void(v) {
                        self.regs.remove(&i);
                        let k = self.alloc(None, Slot::Var(v));
                        self.code.push(Instr::GetVariable(Reg::X(k), i));
                        self.loc.insert(v, Reg::X(k));
                    }
                    self.use_var(v);
                    if self.is_void(v) {
                        self.regs.remove(&i);
                    }
                }
                Some(v) => {
                    let r = self.loc[&v];
                    self.code.push(Instr::GetValue(r, i));
                    self.regs.remove(&i);
                    self.use_var(v);
                }
                None => {
                    self.get_term(&args[i], i, true);
                    self.flush_deferred();
                }
            }
        }
    }

    fn flush_deferred(&mut self) {
        while !self.deferred.is_empty() {
            let pending = std::mem::take(&mut self.deferred);
            for (k, t) in pending {
                self.get_term(&t, k, true);
            }
        }
    }

    /// Match register `k` against a non-variable term (read or write mode
    /// is decided at run time).
    fn get_term(&mut self, t: &Term, k: usize, consume: bool) {
        match t {
            Term::Atom(a) if a == "[]" => self.code.push(Instr::GetNil(k)),
            Term::Atom(a) => self.code.push(Instr::GetAtom(a.clone(), k)),
            Term::Int(n) => self.code.push(Instr::GetInteger(*n, k)),
            Term::Float(x) => self.code.push(Instr::GetFloat(*x, k)),
            Term::Compound(_, args) => {
                if is_list_cell(t) {
                    self.code.push(Instr::GetList(k));
                } else {
                    self.code.push(Instr::GetStructure(struct_ind(t), k));
                }
                if consume {
                    self.regs.remove(&k);
                }
                self.unify_args(args);
                return;
            }
            Term::Var(_) => unreachable!("variables are matched by the caller"),
        }
        if consume {
            self.regs.remove(&k);
        }
    }

    fn flush_voids(&mut self, n: &mut usize) {
        if *n > 0 {
            self.code.push(Instr::UnifyVoid(*n));
            *n = 0;
        }
    }

    fn unify_args(&mut self, args: &[Term]) {
        let mut pending = Vec::new();
        let mut voids = 0;
        for a in args {
            if let Some(v) = var_id(a) {
                if self.is_void(v) {
                    voids += 1;
                    self.use_var(v);
                    continue;
                }
            }
            self.flush_voids(&mut voids);
            match a {
                Term::Var(var) => {
                    let v = var.id;
                    if self.seen.insert(v) {
                        if let Some(&j) = self.perm.get(&v) {
                            self.code.push(Instr::UnifyVariable(Reg::Y(j)));
                            self.loc.insert(v, Reg::Y(j));
                        } else {
                            let k = self.alloc(self.pref(v), Slot::Var(v));
                            self.code.push(Instr::UnifyVariable(Reg::X(k)));
                            self.loc.insert(v, Reg::X(k));
                        }
                    } else {
                        self.code.push(Instr::UnifyValue(self.loc[&v]));
                    }
                    self.use_var(v);
                }
                Term::Atom(s) if s == "[]" => self.code.push(Instr::UnifyNil),
                Term::Atom(s) => self.code.push(Instr::UnifyAtom(s.clone())),
                Term::Int(n) => self.code.push(Instr::UnifyInteger(*n)),
                Term::Float(x) => self.code.push(Instr::UnifyFloat(*x)),
                Term::Compound(..) => {
                    let k = self.alloc(None, Slot::Scratch);
                    self.code.push(Instr::UnifyVariable(Reg::X(k)));
                    pending.push((k, a.clone()));
                }
            }
        }
        self.flush_voids(&mut voids);
        if self.opts.lco {
            for (k, t) in pending {
                self.get_term(&t, k, true);
            }
        } else {
            self.deferred.extend(pending);
        }
    }

    /// Build a term in write mode into register `target`.
    fn build(&mut self, t: &Term, target: usize) {
        match t {
            Term::Atom(a) if a == "[]" => self.code.push(Instr::PutNil(target)),
            Term::Atom(a) => self.code.push(Instr::PutAtom(a.clone(), target)),
            Term::Int(n) => self.code.push(Instr::PutInteger(*n, target)),
            Term::Float(x) => self.code.push(Instr::PutFloat(*x, target)),
            Term::Var(_) => unreachable!("variables are loaded by the caller"),
            Term::Compound(_, args) => {
                let saved = self.put_floor;
                self.put_floor = Some(self.floor().max(target + 1));
                let mut sub = HashMap::new();
                for (i, a) in args.iter().enumerate() {
                    if matches!(a, Term::Compound(..)) {
                        let k = self.alloc(None, Slot::Scratch);
                        self.build(a, k);
                        sub.insert(i, k);
                    }
                }
                if is_list_cell(t) {
                    self.code.push(Instr::PutList(target));
                } else {
                    self.code.push(Instr::PutStructure(struct_ind(t), target));
                }
                let mut voids = 0;
                for (i, a) in args.iter().enumerate() {
                    if let Some(v) = var_id(a) {
                        if self.is_void(v) {
                            voids += 1;
                            self.use_var(v);
                            continue;
                        }
                    }
                    self.flush_voids(&mut voids);
                    match a {
                        Term::Var(var) => {
                            let v = var.id;
                            if self.seen.insert(v) {
                                if let Some(&j) = self.perm.get(&v) {
                                    self.code.push(Instr::UnifyVariable(Reg::Y(j)));
                                    self.loc.insert(v, Reg::Y(j));
                                } else {
                                    let k = self.alloc(self.pref(v), Slot::Var(v));
                                    self.code.push(Instr::UnifyVariable(Reg::X(k)));
                                    self.loc.insert(v, Reg::X(k));
                                }
                            } else {
                                self.code.push(Instr::UnifyValue(self.loc[&v]));
                            }
                            self.use_var(v);
                        }
                        Term::Atom(s) if s == "[]" => self.code.push(Instr::UnifyNil),
                        Term::Atom(s) => self.code.push(Instr::UnifyAtom(s.clone())),
                        Term::Int(n) => self.code.push(Instr::UnifyInteger(*n)),
                        Term::Float(x) => self.code.push(Instr::UnifyFloat(*x)),
                        Term::Compound(..) => {
                            let k = sub[&i];
                            self.code.push(Instr::UnifyValue(Reg::X(k)));
                            self.regs.remove(&k);
                        }
                    }
                }
                self.flush_voids(&mut voids);
                self.put_floor = saved;
            }
        }
    }

    /// Put a term's value in some X register; returns it and whether it is
    /// a scratch register to release after use.
    fn load(&mut self, t: &Term) -> (usize, bool) {
        match t {
            Term::Var(var) => {
                let v = var.id;
                let out = if self.seen.contains(&v) {
                    match self.loc[&v] {
                        Reg::X(k) => (k, false),
                        r @ Reg::Y(_) => {
                            let k = self.alloc(None, Slot::Scratch);
                            self.code.push(Instr::PutValue(r, k));
                            (k, true)
                        }
                    }
                } else if let Some(&j) = self.perm.get(&v) {
                    self.seen.insert(v);
                    let k = self.alloc(None, Slot::Scratch);
                    self.code.push(Instr::PutVariable(Reg::Y(j), k));
                    self.loc.insert(v, Reg::Y(j));
                    (k, true)
                } else {
                    self.seen.insert(v);
                    let k = self.alloc(self.pref(v), Slot::Var(v));
                    self.code.push(Instr::PutVariable(Reg::X(k), k));
                    self.loc.insert(v, Reg::X(k));
                    (k, false)
                };
                self.use_var(v);
                out
            }
            _ => {
                let k = self.alloc(None, Slot::Scratch);
                self.build(t, k);
                (k, true)
            }
        }
    }

    fn release(&mut self, k: usize, scratch: bool) {
        if scratch && self.regs.get(&k) == Some(&Slot::Scratch) {
            self.regs.remove(&k);
        }
    }

    fn test(&mut self, routine: &str, t: &Term) {
        if let Some(v) = var_id(t).filter(|v| self.seen.contains(v)) {
            let r = self.loc[&v];
            self.code.push(Instr::CallC(routine.to_string(), vec![r]));
            self.use_var(v);
            return;
        }
        let (k, s) = self.load(t);
        self.code.push(Instr::CallC(routine.to_string(), vec![Reg::X(k)]));
        self.release(k, s);
    }

    fn unify(&mut self, a: &Term, b: &Term) {
        let seen_x = |g: &Self, t: &Term| var_id(t).is_some_and(|v| g.seen.contains(&v));
        // Prefer loading the side that is already available.
        let (a, b) = if !seen_x(self, a) && seen_x(self, b) { (b, a) } else { (a, b) };
        if let Some(v) = var_id(a).filter(|v| !self.seen.contains(v)) {
            if !b.is_var() {
                let (k, _) = self.load(b);
                self.bind_fresh(v, k);
                return;
            }
        }
        let (k, s) = self.load(a);
        match b {
            Term::Var(var) => {
                let v = var.id;
                if self.seen.contains(&v) {
                    self.code.push(Instr::GetValue(self.loc[&v], k));
                    self.use_var(v);
                } else {
                    self.bind_fresh(v, k);
                    return;
                }
            }
            _ => self.get_term(b, k, false),
        }
        self.release(k, s);
    }

    /// First occurrence of `v`, unified with the value held in X(k).
    fn bind_fresh(&mut self, v: usize, k: usize) {
        self.seen.insert(v);
        if let Some(&j) = self.perm.get(&v) {
            self.code.push(Instr::GetVariable(Reg::Y(j), k));
            self.loc.insert(v, Reg::Y(j));
            self.release(k, true);
        } else if self.regs.get(&k) == Some(&Slot::Scratch) {
            self.regs.insert(k, Slot::Var(v));
            self.loc.insert(v, Reg::X(k));
        } else {
            let k2 = self.alloc(self.pref(v), Slot::Var(v));
            self.code.push(Instr::GetVariable(Reg::X(k2), k));
            self.loc.insert(v, Reg::X(k2));
        }
        self.use_var(v);
    }

    fn put_args(&mut self, args: &[Term]) {
        let n = args.len();
        self.put_floor = Some(n.max(self.floor()));
        for (i, a) in args.iter().enumerate() {
            if let Some(v) = var_id(a) {
                if self.seen.contains(&v) && self.loc.get(&v) == Some(&Reg::X(i)) {
                    self.use_var(v);
                    self.regs.insert(i, Slot::Arg);
                    continue;
                }
            }
            if let Some(Slot::Var(w)) = self.regs.get(&i).copied() {
                if self.remaining.get(&w).copied().unwrap_or(0) > 0 {
                    self.regs.remove(&i);
                    let k = self.alloc(None, Slot::Var(w));
                    self.code.push(Instr::PutValue(Reg::X(i), k));
                    self.loc.insert(w, Reg::X(k));
                }
            }
            self.regs.remove(&i);
            match a {
                Term::Var(var) => {
                    let v = var.id;
                    if self.seen.insert(v) {
                        if let Some(&j) = self.perm.get(&v) {
                            self.code.push(Instr::PutVariable(Reg::Y(j), i));
                            self.loc.insert(v, Reg::Y(j));
                        } else {
                            self.code.push(Instr::PutVariable(Reg::X(i), i));
                            self.loc.insert(v, Reg::X(i));
                        }
                    } else {
                        self.code.push(Instr::PutValue(self.loc[&v], i));
                    }
                    self.use_var(v);
                }
                _ => self.build(a, i),
            }
            self.regs.insert(i, Slot::Arg);
        }
        self.put_floor = None;
    }
}
