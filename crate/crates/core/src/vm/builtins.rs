//! Native predicates: control, database and all-solutions support.

use std::collections::HashMap;
use std::rc::Rc;

use super::machine::*;
use super::word::{atoms, Atom, STerm, Word};

pub fn ok(b: bool) -> Res<Ctl> {
    Ok(if b { Ctl::True } else { Ctl::Fail })
}

macro_rules! natives {
    ($( $name:literal / $arity:literal => $f:path ),* $(,)?) => {
        vec![$( NativeDef { name: $name, arity: $arity, f: $f } ),*]
    };
}

pub fn natives() -> Vec<NativeDef> {
    let mut v = natives![
        "call"/1 => call1,
        "call"/2 => call_n::<2>,
        "call"/3 => call_n::<3>,
        "call"/4 => call_n::<4>,
        "call"/5 => call_n::<5>,
        "call"/6 => call_n::<6>,
        "call"/7 => call_n::<7>,
        "call"/8 => call_n::<8>,
        "$call_goal"/1 => call_goal,
        "throw"/1 => throw,
        "halt"/0 => halt0,
        "halt"/1 => halt1,
        "$catch_enter"/4 => catch_enter,
        "$catch_leave"/1 => catch_leave,
        "="/2 => unify2,
        "\\="/2 => not_unify,
        "assert"/1 => assertz,
        "assertz"/1 => assertz,
        "asserta"/1 => asserta,
        "$dyn_refs"/2 => dyn_refs,
        "$clause_inst"/3 => clause_inst,
        "$erase"/1 => erase,
        "$clause_check"/2 => clause_check,
        "abolish"/1 => abolish,
        "$bag_open"/1 => bag_open,
        "$bag_add"/2 => bag_add,
        "$bag_close"/2 => bag_close,
        "$bag_groups"/2 => bag_groups,
        "$free_witness"/2 => free_witness,
    ];
    v.extend(super::terms_blt::natives());
    v.extend(super::arith::natives());
    v.extend(super::io::natives());
    v.extend(super::fdlib::natives());
    v
}

// ---- control ----

fn call1(m: &mut Machine) -> Res<Ctl> {
    m.x[1] = Word::Int(m.b as i64);
    Ok(Ctl::Jump(m.call2.expect("'$call'/2 linked")))
}

/// call/N: add the extra arguments to the goal, then as call/1.
fn call_n<const N: usize>(m: &mut Machine) -> Res<Ctl> {
    let n = N;
    let g = m.x[0];
    let extra: Vec<Word> = (1..n).map(|i| m.x[i]).collect();
    let (f, k) = m.callable_arg(g)?;
    let mut args: Vec<Word> = (0..k).map(|i| m.arg_of(g, i)).collect();
    args.extend(extra);
    m.x[0] = m.new_struct(f, &args);
    call1(m)
}

fn call_goal(m: &mut Machine) -> Res<Ctl> {
    let g = m.x[0];
    let (f, n) = m.callable_arg(g)?;
    for i in 0..n {
        m.x[i] = m.arg_of(g, i);
    }
    m.call_pred(f, n)?;
    Ok(Ctl::Jump(m.p))
}

fn throw(m: &mut Machine) -> Res<Ctl> {
    if m.is_var(m.x[0]) {
        return Err(m.inst_error());
    }
    Err(PlError::Throw(m.to_sterm(m.x[0])))
}

fn halt0(_: &mut Machine) -> Res<Ctl> {
    Err(PlError::Halt(0))
}

fn halt1(m: &mut Machine) -> Res<Ctl> {
    let n = m.int_arg(m.x[0])?;
    Err(PlError::Halt(n as i32))
}

fn catch_enter(m: &mut Machine) -> Res<Ctl> {
    m.push_cp(ADDR_CATCH_FAIL, 3)?;
    let mark = Word::Int(m.b as i64);
    ok(m.unify(m.x[3], mark))
}

fn catch_leave(m: &mut Machine) -> Res<Ctl> {
    if let Word::Int(b) = m.deref(m.x[0]) {
        if m.b == b as usize {
            m.b = m.prev_b(m.b);
        }
    }
    Ok(Ctl::True)
}

fn unify2(m: &mut Machine) -> Res<Ctl> {
    ok(m.unify(m.x[0], m.x[1]))
}

fn not_unify(m: &mut Machine) -> Res<Ctl> {
    let mark = m.trail.len();
    let h = m.heap.len();
    // Trail everything so the attempt can be undone.
    m.push_cp(ADDR_FAIL, 0)?;
    let r = m.unify(m.x[0], m.x[1]);
    let b = m.b;
    m.restore_cp(b);
    m.b = m.prev_b(b);
    debug_assert!(m.trail.len() == mark && m.heap.len() == h);
    ok(!r)
}

// ---- database ----

fn split_clause(m: &Machine, c: Word) -> (Word, Word) {
    let c = m.deref(c);
    if let Some((f, 2)) = m.functor_of(c) {
        if f == atoms::NECK {
            return (m.arg_of(c, 0), m.arg_of(c, 1));
        }
    }
    (c, Word::Atm(atoms::TRUE))
}

impl Machine {
    pub fn pred_indicator_word(&mut self, f: Atom, n: usize) -> STerm {
        self.pred_indicator(f, n)
    }

    fn check_modifiable(&mut self, f: Atom, n: usize) -> Res<()> {
        match self.preds.get(&(f, n)).map(|p| p.kind.clone()) {
            Some(PredKind::Static(_)) | Some(PredKind::Native(_)) => {
                let pi = self.pred_indicator(f, n);
                Err(self.permission_error("modify", "static_procedure", pi))
            }
            _ => Ok(()),
        }
    }

    /// Add a clause to a dynamic predicate, creating it if needed.
    pub fn add_clause(&mut self, c: Word, front: bool) -> Res<()> {
        let (h, b) = split_clause(self, c);
        let (f, n) = self.callable_arg(h)?;
        let bd = self.deref(b);
        if matches!(bd, Word::Int(_) | Word::Flt(_)) {
            return Err(self.type_error("callable", bd));
        }
        self.check_modifiable(f, n)?;
        let mut map = HashMap::new();
        let head = self.to_sterm_map(h, &mut map);
        let body = if matches!(bd, Word::Ref(_)) {
            let v = self.to_sterm_map(bd, &mut map);
            STerm::Str(atoms::CALL, vec![v].into())
        } else {
            self.to_sterm_map(bd, &mut map)
        };
        let id = self.next_clause;
        self.next_clause += 1;
        let cl = Rc::new(Clause { id, head, body, nvars: map.len() as u32 });
        self.clause_refs.insert(id, cl.clone());
        if !self.preds.contains_key(&(f, n)) {
            let file = self.atoms.intern("user");
            let mask = crate::wam2ma::mask::DYNAMIC | crate::wam2ma::mask::PUBLIC;
            self.preds.insert((f, n), PredEntry { kind: PredKind::Dynamic, file, line: 0, mask });
        }
        let d = self.db.entry((f, n)).or_default();
        if front {
            d.clauses.insert(0, cl);
        } else {
            d.clauses.push(cl);
        }
        Ok(())
    }
}

fn assertz(m: &mut Machine) -> Res<Ctl> {
    m.add_clause(m.x[0], false)?;
    Ok(Ctl::True)
}

fn asserta(m: &mut Machine) -> Res<Ctl> {
    m.add_clause(m.x[0], true)?;
    Ok(Ctl::True)
}

/// Cheap first-argument filter: can a stored head match the goal?
fn first_arg_may_match(m: &Machine, head: &STerm, goal: Word) -> bool {
    let STerm::Str(_, args) = head else { return true };
    let g = m.deref(m.arg_of(goal, 0));
    match (&args[0], g) {
        (STerm::Var(_), _) | (_, Word::Ref(_)) | (_, Word::Fdv(_)) => true,
        (STerm::Atm(a), Word::Atm(b)) => *a == b,
        (STerm::Int(a), Word::Int(b)) => *a == b,
        (STerm::Flt(a), Word::Flt(b)) => *a == b,
        (STerm::Str(f, xs), w) => m.functor_of(w) == Some((*f, xs.len())) && !matches!(w, Word::Atm(_)),
        _ => false,
    }
}

fn dyn_refs(m: &mut Machine) -> Res<Ctl> {
    let g = m.x[0];
    let (f, n) = m.callable_arg(g)?;
    let refs: Vec<Word> = match m.db.get(&(f, n)) {
        Some(d) => d
            .clauses
            .iter()
            .filter(|c| n == 0 || first_arg_may_match(m, &c.head, g))
            .map(|c| Word::Int(c.id as i64))
            .collect(),
        None => Vec::new(),
    };
    let l = m.make_list(&refs, Word::Atm(atoms::NIL));
    ok(m.unify(m.x[1], l))
}

fn clause_inst(m: &mut Machine) -> Res<Ctl> {
    let id = m.int_arg(m.x[0])? as u64;
    let Some(c) = m.clause_refs.get(&id).cloned() else { return Ok(Ctl::Fail) };
    let mut vars = Vec::with_capacity(c.nvars as usize);
    let h = m.put_sterm(&c.head, &mut vars);
    let b = m.put_sterm(&c.body, &mut vars);
    ok(m.unify(m.x[1], h) && m.unify(m.x[2], b))
}

fn erase(m: &mut Machine) -> Res<Ctl> {
    let id = m.int_arg(m.x[0])? as u64;
    let Some(c) = m.clause_refs.get(&id).cloned() else { return Ok(Ctl::Fail) };
    let Some(key) = c.head.functor() else { return Ok(Ctl::Fail) };
    if let Some(d) = m.db.get_mut(&key) {
        if let Some(i) = d.clauses.iter().position(|x| x.id == id) {
            d.clauses.remove(i);
            return Ok(Ctl::True);
        }
    }
    Ok(Ctl::Fail)
}

fn clause_check(m: &mut Machine) -> Res<Ctl> {
    let (f, n) = m.callable_arg(m.x[0])?;
    let b = m.deref(m.x[1]);
    if matches!(b, Word::Int(_) | Word::Flt(_)) {
        return Err(m.type_error("callable", b));
    }
    match m.preds.get(&(f, n)).map(|p| p.kind.clone()) {
        Some(PredKind::Static(_)) | Some(PredKind::Native(_)) => {
            let pi = m.pred_indicator(f, n);
            Err(m.permission_error("access", "private_procedure", pi))
        }
        _ => Ok(Ctl::True),
    }
}

fn abolish(m: &mut Machine) -> Res<Ctl> {
    let pi = m.deref(m.x[0]);
    if m.functor_of(pi) != Some((atoms::SLASH, 2)) {
        return Err(m.type_error("predicate_indicator", pi));
    }
    let f = m.atom_arg(m.arg_of(pi, 0))?;
    let n = m.int_arg(m.arg_of(pi, 1))? as usize;
    m.check_modifiable(f, n)?;
    m.db.remove(&(f, n));
    m.preds.remove(&(f, n));
    Ok(Ctl::True)
}

// ---- all-solutions ----

fn bag_open(m: &mut Machine) -> Res<Ctl> {
    m.bags.push(Vec::new());
    let k = Word::Int(m.bags.len() as i64 - 1);
    ok(m.unify(m.x[0], k))
}

fn bag_add(m: &mut Machine) -> Res<Ctl> {
    let k = m.int_arg(m.x[0])? as usize;
    let t = m.to_sterm(m.x[1]);
    m.bags[k].push(t);
    Ok(Ctl::True)
}

fn bag_close(m: &mut Machine) -> Res<Ctl> {
    let k = m.int_arg(m.x[0])? as usize;
    let items = std::mem::take(&mut m.bags[k]);
    m.bags.truncate(k);
    let ws: Vec<Word> = items.iter().map(|t| m.put_sterm(t, &mut Vec::new())).collect();
    let l = m.make_list(&ws, Word::Atm(atoms::NIL));
    ok(m.unify(m.x[1], l))
}

/// Group `W-T` pairs by witness (up to variable renaming), keeping the
/// first-solution order of witnesses sorted in standard order.
fn bag_groups(m: &mut Machine) -> Res<Ctl> {
    let pairs = m.list_arg(m.x[0])?;
    let mut keyed: Vec<(Word, Word)> = pairs.iter().map(|&p| (m.arg_of(p, 0), m.arg_of(p, 1))).collect();
    keyed.sort_by(|a, b| m.compare(a.0, b.0));
    let mut groups: Vec<(Word, STerm, Vec<Word>)> = Vec::new();
    for (w, t) in keyed {
        let s = m.to_sterm(w);
        match groups.iter_mut().find(|g| g.1 == s) {
            Some(g) => g.2.push(t),
            None => groups.push((w, s, vec![t])),
        }
    }
    let mut out = Vec::new();
    for (w, _, ts) in groups {
        let l = m.make_list(&ts, Word::Atm(atoms::NIL));
        out.push(m.new_struct(atoms::MINUS, &[w, l]));
    }
    let l = m.make_list(&out, Word::Atm(atoms::NIL));
    ok(m.unify(m.x[1], l))
}

impl Machine {
    /// Variables of a term in first-occurrence order (as cell addresses).
    pub fn term_vars(&self, w: Word, out: &mut Vec<usize>) {
        match self.deref(w) {
            Word::Ref(a) => {
                if !out.contains(&a) {
                    out.push(a)
                }
            }
            Word::Fdv(v) => {
                let a = self.fd.vars[v as usize].cell;
                if !out.contains(&a) {
                    out.push(a)
                }
            }
            Word::Lst(_) | Word::Stc(_) => {
                let (_, n) = self.functor_of(w).unwrap_or((atoms::NIL, 0));
                for i in 0..n {
                    self.term_vars(self.arg_of(w, i), out);
                }
            }
            _ => {}
        }
    }
}

fn free_witness(m: &mut Machine) -> Res<Ctl> {
    let tg = m.deref(m.x[0]);
    let t = m.arg_of(tg, 0);
    let mut g = m.arg_of(tg, 1);
    let mut bound = Vec::new();
    m.term_vars(t, &mut bound);
    let caret = m.atoms.intern("^");
    while m.functor_of(g) == Some((caret, 2)) {
        m.term_vars(m.arg_of(g, 0), &mut bound);
        g = m.arg_of(g, 1);
    }
    let mut gv = Vec::new();
    m.term_vars(g, &mut gv);
    let free: Vec<Word> = gv.into_iter().filter(|a| !bound.contains(a)).map(Word::Ref).collect();
    let w = if free.is_empty() {
        Word::Atm(atoms::NIL)
    } else {
        let f = m.atoms.intern("$w");
        m.new_struct(f, &free)
    };
    ok(m.unify(m.x[1], w))
}
