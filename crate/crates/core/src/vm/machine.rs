//! Machine state, unification, choice points and the instruction loop.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::rc::Rc;

use thiserror::Error;

use super::code::{Dst, Op, Opnd};
use super::word::{atoms, Atom, AtomTable, STerm, Word};
use crate::fd::{self, Undo};
use crate::reader::OpTable;

/// Choice point layout, as offsets from B.
pub const CP_ALT: usize = 0;
pub const CP_H: usize = 1;
pub const CP_TR: usize = 2;
pub const CP_CS: usize = 3;
pub const CP_E: usize = 4;
pub const CP_CP: usize = 5;
pub const CP_B: usize = 6;
pub const CP_SERIAL: usize = 7;
pub const CP_K: usize = 8;
pub const CP_X: usize = 9;

/// Environment layout, as offsets from E.
pub const ENV_E: usize = 0;
pub const ENV_CP: usize = 1;
pub const ENV_N: usize = 2;
pub const ENV_Y: usize = 3;

pub const NREGS: usize = 1024;

/// Fixed code addresses.
pub const ADDR_FAIL: usize = 0;
pub const ADDR_STOP: usize = 1;
pub const ADDR_STOP_FAIL: usize = 2;
pub const ADDR_CATCH_FAIL: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub heap: usize,
    pub local: usize,
    pub trail: usize,
    pub cstack: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { heap: 8 << 20, local: 4 << 20, trail: 2 << 20, cstack: 1 << 20 }
    }
}

#[derive(Clone, Debug)]
pub enum TrailEntry {
    /// Reset a bound variable cell to unbound.
    Bind(usize),
    /// Restore a cell's previous content.
    Cell(usize, Word),
    Fd(Undo),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlError {
    #[error("uncaught exception")]
    Throw(STerm),
    #[error("halt({0})")]
    Halt(i32),
    #[error("{0}")]
    Fatal(String),
}

pub type Res<T> = Result<T, PlError>;

/// Outcome of a native predicate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ctl {
    True,
    Fail,
    /// Continue at a code address, keeping the current continuation.
    Jump(usize),
}

pub type NativeFn = fn(&mut Machine) -> Res<Ctl>;

#[derive(Clone, Copy)]
pub struct NativeDef {
    pub name: &'static str,
    pub arity: usize,
    pub f: NativeFn,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PredKind {
    Static(usize),
    Dynamic,
    Native(u32),
}

#[derive(Clone, Debug)]
pub struct PredEntry {
    pub kind: PredKind,
    pub file: Atom,
    pub line: usize,
    pub mask: i64,
}

/// Entry points registered by `Pl_New_Object`.
#[derive(Clone, Debug)]
pub struct ObjectEntry {
    pub name: String,
    pub init: usize,
    pub sys: usize,
    pub user: usize,
}

#[derive(Clone, Debug)]
pub struct Clause {
    pub id: u64,
    pub head: STerm,
    pub body: STerm,
    pub nvars: u32,
}

#[derive(Clone, Debug, Default)]
pub struct DynPred {
    pub clauses: Vec<Rc<Clause>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SwKey {
    Atm(Atom),
    Int(i64),
    Fun(Atom, u32),
}

#[derive(Clone, Debug)]
pub struct Flags {
    pub unknown_error: bool,
    pub double_quotes_codes: bool,
    pub trace: bool,
}

impl Default for Flags {
    fn default() -> Self {
        Flags { unknown_error: true, double_quotes_codes: true, trace: false }
    }
}

/// Output sink that can be swapped for a shared buffer in tests.
pub type Sink = Box<dyn Write>;

pub struct Machine {
    pub atoms: AtomTable,
    pub heap: Vec<Word>,
    pub x: Vec<Word>,
    pub ls: Vec<Word>,
    pub e: usize,
    pub b: usize,
    pub cp: usize,
    pub p: usize,
    pub trail: Vec<TrailEntry>,
    pub s: usize,
    pub write_mode: bool,
    pub ret: Word,
    pub code: Rc<Vec<Op>>,
    pub data: Vec<Word>,
    pub tables: Vec<HashMap<SwKey, usize>>,
    pub preds: HashMap<(Atom, usize), PredEntry>,
    pub db: HashMap<(Atom, usize), DynPred>,
    pub clause_refs: HashMap<u64, Rc<Clause>>,
    pub next_clause: u64,
    pub objects: Vec<ObjectEntry>,
    pub symbols: HashMap<String, usize>,
    pub weak_symbols: std::collections::HashSet<String>,
    pub natives: Vec<NativeDef>,
    pub fd: fd::Store,
    pub serial: u64,
    pub ops: OpTable,
    pub flags: Flags,
    pub out: Sink,
    pub err: Sink,
    pub input: Box<dyn BufRead>,
    pub limits: Limits,
    pub user_directives: usize,
    pub bags: Vec<Vec<STerm>>,
    pub globals: HashMap<Atom, STerm>,
    pub loading: Option<String>,
    pub consulted: Vec<String>,
    pub top_level: bool,
    pub(crate) call1: Option<usize>,
    pub(crate) call_dynamic: Option<usize>,
    pub(crate) call2: Option<usize>,
    pub(crate) var_names: Vec<(String, usize)>,
    /// Clauses already parsed from `input` but not yet consumed.
    pub(crate) pending: std::collections::VecDeque<crate::reader::ReadTerm>,
    /// Stubs of a static load waiting for symbols of later objects.
    pub(crate) forward: Vec<(usize, String)>,
}

impl Machine {
    /// A machine with only the fixed code stubs; no libraries loaded.
    pub fn bare(limits: Limits) -> Machine {
        let code = vec![Op::PlFail, Op::Stop, Op::StopFail, Op::CatchFail];
        let mut m = Machine {
            atoms: AtomTable::with_predefined(),
            heap: Vec::with_capacity(1 << 12),
            x: vec![Word::Atm(atoms::NIL); NREGS],
            ls: vec![Word::Int(0); 1 << 12],
            e: 0,
            b: 0,
            cp: ADDR_STOP,
            p: ADDR_STOP,
            trail: Vec::new(),
            s: 0,
            write_mode: false,
            ret: Word::Int(0),
            code: Rc::new(code),
            data: Vec::new(),
            tables: Vec::new(),
            preds: HashMap::new(),
            db: HashMap::new(),
            clause_refs: HashMap::new(),
            next_clause: 1,
            objects: Vec::new(),
            symbols: HashMap::new(),
            weak_symbols: Default::default(),
            natives: Vec::new(),
            fd: fd::Store::default(),
            serial: 0,
            ops: OpTable::default(),
            flags: Flags::default(),
            out: Box::new(std::io::stdout()),
            err: Box::new(std::io::stderr()),
            input: Box::new(std::io::BufReader::new(std::io::stdin())),
            limits,
            user_directives: 0,
            bags: Vec::new(),
            globals: HashMap::new(),
            loading: None,
            consulted: Vec::new(),
            top_level: false,
            call1: None,
            call_dynamic: None,
            call2: None,
            var_names: Vec::new(),
            pending: Default::default(),
            forward: Vec::new(),
        };
        // Base choice point: a barrier that stops the machine.
        let base = [
            Word::Code(ADDR_STOP_FAIL),
            Word::Int(0),
            Word::Int(0),
            Word::Int(0),
            Word::Int(CP_X as i64),
            Word::Code(ADDR_STOP),
            Word::Int(0),
            Word::Int(0),
            Word::Int(0),
        ];
        m.ls[..CP_X].copy_from_slice(&base);
        // Base environment right above it.
        m.e = CP_X;
        m.ls[CP_X + ENV_E] = Word::Int(CP_X as i64);
        m.ls[CP_X + ENV_CP] = Word::Code(ADDR_STOP);
        m.ls[CP_X + ENV_N] = Word::Int(0);
        m
    }

    pub fn code_mut(&mut self) -> &mut Vec<Op> {
        Rc::make_mut(&mut self.code)
    }

    // ---- errors ----

    pub fn fatal(msg: impl Into<String>) -> PlError {
        PlError::Fatal(msg.into())
    }

    fn sterm_compound(&mut self, f: &str, args: Vec<STerm>) -> STerm {
        if args.is_empty() {
            STerm::Atm(self.atoms.intern(f))
        } else {
            STerm::Str(self.atoms.intern(f), args.into())
        }
    }

    pub fn error_term(&mut self, formal: STerm) -> PlError {
        let ctx = STerm::Var(0);
        PlError::Throw(STerm::Str(atoms::ERROR, vec![formal, ctx].into()))
    }

    pub fn inst_error(&mut self) -> PlError {
        let f = STerm::Atm(self.atoms.intern("instantiation_error"));
        self.error_term(f)
    }

    pub fn type_error(&mut self, ty: &str, culprit: Word) -> PlError {
        let c = self.to_sterm(culprit);
        let t = STerm::Atm(self.atoms.intern(ty));
        let f = self.sterm_compound("type_error", vec![t, c]);
        self.error_term(f)
    }

    pub fn domain_error(&mut self, dom: &str, culprit: Word) -> PlError {
        let c = self.to_sterm(culprit);
        let t = STerm::Atm(self.atoms.intern(dom));
        let f = self.sterm_compound("domain_error", vec![t, c]);
        self.error_term(f)
    }

    pub fn pred_indicator(&mut self, name: Atom, arity: usize) -> STerm {
        STerm::Str(atoms::SLASH, vec![STerm::Atm(name), STerm::Int(arity as i64)].into())
    }

    pub fn existence_error(&mut self, name: Atom, arity: usize) -> PlError {
        let pi = self.pred_indicator(name, arity);
        let proc_ = STerm::Atm(self.atoms.intern("procedure"));
        let f = self.sterm_compound("existence_error", vec![proc_, pi]);
        self.error_term(f)
    }

    pub fn permission_error(&mut self, action: &str, ty: &str, culprit: STerm) -> PlError {
        let a = STerm::Atm(self.atoms.intern(action));
        let t = STerm::Atm(self.atoms.intern(ty));
        let f = self.sterm_compound("permission_error", vec![a, t, culprit]);
        self.error_term(f)
    }

    pub fn evaluation_error(&mut self, what: &str) -> PlError {
        let w = STerm::Atm(self.atoms.intern(what));
        let f = self.sterm_compound("evaluation_error", vec![w]);
        self.error_term(f)
    }

    pub fn representation_error(&mut self, what: &str) -> PlError {
        let w = STerm::Atm(self.atoms.intern(what));
        let f = self.sterm_compound("representation_error", vec![w]);
        self.error_term(f)
    }

    pub fn resource_error(&mut self, what: &str) -> PlError {
        let w = STerm::Atm(self.atoms.intern(what));
        let f = self.sterm_compound("resource_error", vec![w]);
        self.error_term(f)
    }

    // ---- heap ----

    pub fn new_var(&mut self) -> Word {
        let a = self.heap.len();
        let w = Word::Ref(a);
        self.heap.push(w);
        w
    }

    pub fn deref(&self, mut w: Word) -> Word {
        while let Word::Ref(a) = w {
            let c = self.heap[a];
            if c == w {
                return w;
            }
            w = c;
        }
        w
    }

    /// Cell content as a word that can be copied elsewhere: unbound cells and
    /// FD variable cells are referenced rather than copied.
    pub fn cell(&self, a: usize) -> Word {
        match self.heap[a] {
            Word::Fdv(_) => Word::Ref(a),
            w => w,
        }
    }

    /// A word safe to store in another cell or register.
    pub fn storable(&self, w: Word) -> Word {
        match w {
            Word::Fdv(v) => Word::Ref(self.fd.vars[v as usize].cell),
            w => w,
        }
    }

    pub fn hb(&self) -> usize {
        match self.ls[self.b + CP_H] {
            Word::Int(h) => h as usize,
            _ => 0,
        }
    }

    pub fn bind(&mut self, a: usize, w: Word) {
        let w = self.storable(w);
        self.heap[a] = w;
        if a < self.hb() {
            self.trail.push(TrailEntry::Bind(a));
        }
    }

    /// Overwrite a cell, trailing its old content when it predates B.
    pub fn set_cell(&mut self, a: usize, w: Word) {
        let old = self.heap[a];
        self.heap[a] = w;
        if a < self.hb() {
            self.trail.push(TrailEntry::Cell(a, old));
        }
    }

    pub fn untrail(&mut self, to: usize) {
        while self.trail.len() > to {
            match self.trail.pop().unwrap() {
                TrailEntry::Bind(a) => self.heap[a] = Word::Ref(a),
                TrailEntry::Cell(a, w) => self.heap[a] = w,
                TrailEntry::Fd(u) => self.fd.apply_undo(u),
            }
        }
    }

    pub fn unify(&mut self, a: Word, b: Word) -> bool {
        let mut stack = vec![(a, b)];
        while let Some((a, b)) = stack.pop() {
            let a = self.deref(a);
            let b = self.deref(b);
            match (a, b) {
                (Word::Ref(x), Word::Ref(y)) => {
                    if x < y {
                        self.bind(y, a);
                    } else if y < x {
                        self.bind(x, b);
                    }
                }
                (Word::Ref(x), w) | (w, Word::Ref(x)) => self.bind(x, w),
                (Word::Fdv(u), Word::Fdv(v)) => {
                    if u != v && !self.fd_unify_vars(u, v) {
                        return false;
                    }
                }
                (Word::Fdv(v), Word::Int(n)) | (Word::Int(n), Word::Fdv(v)) => {
                    if !self.fd_set_value(v, n) {
                        return false;
                    }
                }
                (Word::Atm(x), Word::Atm(y)) => {
                    if x != y {
                        return false;
                    }
                }
                (Word::Int(x), Word::Int(y)) => {
                    if x != y {
                        return false;
                    }
                }
                (Word::Flt(x), Word::Flt(y)) => {
                    if x != y && !(x.is_nan() && y.is_nan()) {
                        return false;
                    }
                }
                (Word::Lst(x), Word::Lst(y)) => {
                    if x != y {
                        stack.push((self.cell(x + 1), self.cell(y + 1)));
                        stack.push((self.cell(x), self.cell(y)));
                    }
                }
                (Word::Stc(x), Word::Stc(y)) => {
                    if x != y {
                        if self.heap[x] != self.heap[y] {
                            return false;
                        }
                        let Word::Fun(_, n) = self.heap[x] else { return false };
                        for i in (1..=n as usize).rev() {
                            stack.push((self.cell(x + i), self.cell(y + i)));
                        }
                    }
                }
                _ => return false,
            }
        }
        true
    }

    // ---- FD glue ----

    /// Move FD undo records onto the trail and bind cells of newly
    /// instantiated variables.
    pub fn fd_commit(&mut self) {
        for u in self.fd.undo.drain(..) {
            self.trail.push(TrailEntry::Fd(u));
        }
        let inst = std::mem::take(&mut self.fd.instantiated);
        for v in inst {
            let x = &self.fd.vars[v as usize];
            if x.cell == usize::MAX {
                continue;
            }
            if let Some(n) = x.dom.singleton() {
                let c = x.cell;
                if self.heap[c] == Word::Fdv(v) {
                    self.set_cell(c, Word::Int(n));
                }
            }
        }
    }

    pub fn fd_sync(&mut self) {
        self.fd.serial = match self.ls[self.b + CP_SERIAL] {
            Word::Int(s) => s as u64,
            _ => 0,
        };
    }

    pub fn fd_set_value(&mut self, v: u32, n: i64) -> bool {
        self.fd_sync();
        let ok = self.fd.tell(v, &fd::Range::single(n)) && self.fd.propagate();
        if !ok {
            self.fd.clear_queue();
        }
        self.fd_commit();
        ok
    }

    fn fd_unify_vars(&mut self, u: u32, v: u32) -> bool {
        self.fd_sync();
        let spec = self.fd.registry.get("x_eq_y", 2).expect("x_eq_y");
        let ok = self.fd.post(spec, vec![fd::ArgVal::Var(u), fd::ArgVal::Var(v)]);
        self.fd_commit();
        if !ok {
            return false;
        }
        let (cu, cv) = (self.fd.vars[u as usize].cell, self.fd.vars[v as usize].cell);
        if cu != usize::MAX && cv != usize::MAX && self.heap[cu] == Word::Fdv(u) && self.heap[cv] == Word::Fdv(v) {
            let (old, young) = if cu < cv { (cu, cv) } else { (cv, cu) };
            self.set_cell(young, Word::Ref(old));
        }
        true
    }

    // ---- local stack ----

    pub fn int_at(&self, i: usize) -> usize {
        match self.ls[i] {
            Word::Int(n) => n as usize,
            Word::Code(n) => n,
            _ => 0,
        }
    }

    pub fn local_top(&self) -> usize {
        let et = self.e + ENV_Y + self.int_at(self.e + ENV_N);
        let bt = self.b + CP_X + self.int_at(self.b + CP_K);
        et.max(bt)
    }

    fn ensure_local(&mut self, top: usize) -> Res<()> {
        if top > self.ls.len() {
            if top > self.limits.local {
                return Err(self.resource_error("local_stack"));
            }
            let n = (self.ls.len() * 2).max(top).min(self.limits.local.max(top));
            self.ls.resize(n, Word::Int(0));
        }
        Ok(())
    }

    pub fn allocate(&mut self, n: usize) -> Res<()> {
        let ne = self.local_top();
        self.ensure_local(ne + ENV_Y + n)?;
        self.ls[ne + ENV_E] = Word::Int(self.e as i64);
        self.ls[ne + ENV_CP] = Word::Code(self.cp);
        self.ls[ne + ENV_N] = Word::Int(n as i64);
        for i in 0..n {
            self.ls[ne + ENV_Y + i] = Word::Atm(atoms::NIL);
        }
        self.e = ne;
        Ok(())
    }

    pub fn deallocate(&mut self) {
        self.cp = self.int_at(self.e + ENV_CP);
        self.e = self.int_at(self.e + ENV_E);
    }

    pub fn push_cp(&mut self, alt: usize, k: usize) -> Res<()> {
        let nb = self.local_top();
        self.ensure_local(nb + CP_X + k)?;
        if self.trail.len() > self.limits.trail {
            return Err(self.resource_error("trail"));
        }
        self.serial += 1;
        let hdr = [
            Word::Code(alt),
            Word::Int(self.heap.len() as i64),
            Word::Int(self.trail.len() as i64),
            Word::Int(self.fd.cs()),
            Word::Int(self.e as i64),
            Word::Code(self.cp),
            Word::Int(self.b as i64),
            Word::Int(self.serial as i64),
            Word::Int(k as i64),
        ];
        self.ls[nb..nb + CP_X].copy_from_slice(&hdr);
        for i in 0..k {
            self.ls[nb + CP_X + i] = self.x[i];
        }
        self.b = nb;
        Ok(())
    }

    /// Restore the state saved in the choice point at `b` (not popping it).
    pub fn restore_cp(&mut self, b: usize) {
        let tr = self.int_at(b + CP_TR);
        self.untrail(tr);
        let h = self.int_at(b + CP_H);
        self.heap.truncate(h);
        if let Word::Int(cs) = self.ls[b + CP_CS] {
            self.fd.restore_cs(cs);
        }
        self.e = self.int_at(b + CP_E);
        self.cp = self.int_at(b + CP_CP);
        let k = self.int_at(b + CP_K);
        for i in 0..k {
            self.x[i] = self.ls[b + CP_X + i];
        }
    }

    pub fn update_cp(&mut self, alt: usize) {
        let b = self.b;
        self.restore_cp(b);
        self.ls[b + CP_ALT] = Word::Code(alt);
    }

    pub fn delete_cp(&mut self) {
        let b = self.b;
        self.restore_cp(b);
        self.b = self.int_at(b + CP_B);
    }

    pub fn prev_b(&self, b: usize) -> usize {
        self.int_at(b + CP_B)
    }

    pub fn cut_to(&mut self, level: usize) {
        if level < self.b {
            self.b = level;
        }
    }

    pub fn backtrack(&mut self) {
        self.p = self.int_at(self.b + CP_ALT);
    }

    // ---- registers ----

    pub fn y(&self, i: usize) -> Word {
        self.ls[self.e + ENV_Y + i]
    }

    pub fn load(&self, d: Dst) -> Word {
        match d {
            Dst::X(i) => self.x[i],
            Dst::Y(i) => self.ls[self.e + ENV_Y + i],
            Dst::Mem(a) => self.data[a],
        }
    }

    pub fn store(&mut self, d: Dst, w: Word) {
        match d {
            Dst::X(i) => self.x[i] = w,
            Dst::Y(i) => {
                let e = self.e;
                self.ls[e + ENV_Y + i] = w;
            }
            Dst::Mem(a) => self.data[a] = w,
        }
    }

    pub fn opnd(&self, o: &Opnd) -> Word {
        match o {
            Opnd::Int(n) => Word::Int(*n),
            Opnd::Flt(f) => Word::Flt(*f),
            Opnd::Code(a) => Word::Code(*a),
            Opnd::X(i) => self.x[*i],
            Opnd::Y(i) => self.ls[self.e + ENV_Y + *i],
            Opnd::Mem(a) => self.data[*a],
            Opnd::XAddr(_) | Opnd::YAddr(_) | Opnd::MemAddr(_) | Opnd::Str(_) => Word::Int(0),
        }
    }
}

impl Machine {
    /// Run from `self.p` until a `Stop` (true) or the barrier's `StopFail`
    /// (false). Exceptions unwind to the nearest catch or barrier.
    pub fn run(&mut self) -> Res<bool> {
        let mut code = self.code.clone();
        loop {
            let p = self.p;
            match &code[p] {
                Op::CallC(prim, args) => {
                    let r = self.exec_prim(*prim, args);
                    match r {
                        Ok(w) => {
                            self.ret = w;
                            self.p = p + 1;
                        }
                        Err(e) => {
                            self.raise(e)?;
                            code = self.code.clone();
                        }
                    }
                }
                Op::FailRet => {
                    if self.ret == Word::Int(0) {
                        self.backtrack();
                    } else {
                        self.p = p + 1;
                    }
                }
                Op::MoveRet(d) => {
                    let w = self.ret;
                    self.store(*d, w);
                    self.p = p + 1;
                }
                Op::JumpRet => {
                    self.p = match self.ret {
                        Word::Code(a) => a,
                        _ => ADDR_FAIL,
                    };
                }
                Op::Move(s, d) => {
                    let w = self.load(*s);
                    self.store(*d, w);
                    self.p = p + 1;
                }
                Op::PlCall(a) => {
                    self.cp = p + 1;
                    self.p = *a;
                    if self.heap.len() > self.limits.heap {
                        let e = self.resource_error("heap");
                        self.raise(e)?;
                    }
                }
                Op::PlJump(a) => {
                    self.p = *a;
                    if self.heap.len() > self.limits.heap {
                        let e = self.resource_error("heap");
                        self.raise(e)?;
                    }
                }
                Op::PlRet => self.p = self.cp,
                Op::PlFail => self.backtrack(),
                Op::Jump(a) => self.p = *a,
                Op::CRet => return Ok(true),
                Op::Native(id) => {
                    let f = self.natives[*id as usize].f;
                    match f(self) {
                        Ok(Ctl::True) => self.p = self.cp,
                        Ok(Ctl::Fail) => self.backtrack(),
                        Ok(Ctl::Jump(a)) => self.p = a,
                        Err(e) => self.raise(e)?,
                    }
                    if !Rc::ptr_eq(&code, &self.code) {
                        code = self.code.clone();
                    }
                }
                Op::Undefined(sym) => {
                    let sym = sym.clone();
                    if let Err(e) = self.undefined_call(&sym) {
                        self.raise(e)?;
                    }
                }
                Op::Stop => return Ok(true),
                Op::StopFail => {
                    let b = self.b;
                    self.restore_cp(b);
                    self.b = self.prev_b(b);
                    return Ok(false);
                }
                Op::CatchFail => {
                    self.delete_cp();
                    self.backtrack();
                }
            }
        }
    }

    /// Reached a reference that was unresolved at load time.
    fn undefined_call(&mut self, sym: &str) -> Res<()> {
        if let Some(&a) = self.symbols.get(sym) {
            self.p = a;
            return Ok(());
        }
        let (name, arity) = crate::wam2ma::decode_symbol(sym).unwrap_or_else(|| (sym.to_string(), 0));
        let name = self.atoms.intern(&name);
        self.call_pred(name, arity)
    }

    /// Transfer to predicate `name/arity` with its arguments in X registers,
    /// as a jump keeping the current continuation.
    pub fn call_pred(&mut self, name: Atom, arity: usize) -> Res<()> {
        match self.preds.get(&(name, arity)).map(|p| p.kind.clone()) {
            Some(PredKind::Static(a)) => self.p = a,
            Some(PredKind::Native(id)) => {
                let f = self.natives[id as usize].f;
                match f(self)? {
                    Ctl::True => self.p = self.cp,
                    Ctl::Fail => self.backtrack(),
                    Ctl::Jump(a) => self.p = a,
                }
            }
            Some(PredKind::Dynamic) => {
                let g = self.goal_from_regs(name, arity);
                self.x[0] = g;
                self.p = self.call_dynamic.expect("$call_dynamic/1 linked");
            }
            None => {
                if self.flags.unknown_error {
                    return Err(self.existence_error(name, arity));
                }
                self.backtrack();
            }
        }
        Ok(())
    }

    /// Unwind for an error. Returns Ok when a catch/3 took over (P set),
    /// or the error when a barrier was reached (barrier popped).
    fn raise(&mut self, e: PlError) -> Res<()> {
        let ball = match e {
            PlError::Throw(t) => t,
            other => {
                self.unwind_to_barrier();
                return Err(other);
            }
        };
        loop {
            let b = self.b;
            match self.ls[b + CP_ALT] {
                Word::Code(ADDR_STOP_FAIL) => {
                    self.restore_cp(b);
                    if b != 0 {
                        self.b = self.prev_b(b);
                    }
                    return Err(PlError::Throw(ball));
                }
                Word::Code(ADDR_CATCH_FAIL) => {
                    self.restore_cp(b);
                    self.b = self.prev_b(b);
                    let w = self.put_sterm(&ball, &mut Vec::new());
                    let catcher = self.x[1];
                    if self.unify(catcher, w) {
                        // The catch frame was pushed from inside catch/3's
                        // clause; continue after catch/3 itself.
                        self.deallocate();
                        self.x[0] = self.x[2];
                        self.p = self.call1.expect("call/1 linked");
                        return Ok(());
                    }
                }
                _ => self.b = self.prev_b(b),
            }
        }
    }

    fn unwind_to_barrier(&mut self) {
        loop {
            let b = self.b;
            if self.ls[b + CP_ALT] == Word::Code(ADDR_STOP_FAIL) {
                self.restore_cp(b);
                if b != 0 {
                    self.b = self.prev_b(b);
                }
                return;
            }
            self.b = self.prev_b(b);
        }
    }

    /// Push a barrier and run from `entry` with `Stop` as continuation.
    /// On success the barrier and the choice points above it stay, so
    /// `next_solution` can retry; call `close_query` when done.
    pub fn open_query(&mut self, entry: usize) -> Res<bool> {
        self.push_cp(ADDR_STOP_FAIL, 0)?;
        self.cp = ADDR_STOP;
        self.p = entry;
        self.run()
    }

    pub fn next_solution(&mut self) -> Res<bool> {
        self.backtrack();
        self.run()
    }

    /// Drop the choice points of the open query whose barrier is at `barrier`.
    pub fn close_query(&mut self, barrier: usize) {
        if self.b >= barrier {
            self.b = self.prev_b(barrier);
        }
    }

    /// Run `entry` to its first solution, keeping bindings but no choice
    /// points. Registers P, CP and E are preserved.
    pub fn solve_once(&mut self, entry: usize) -> Res<bool> {
        let saved = (self.p, self.cp, self.e);
        let barrier = self.local_top();
        let r = self.open_query(entry);
        if let Ok(true) = r {
            self.close_query(barrier);
        }
        (self.p, self.cp, self.e) = saved;
        r
    }
}
