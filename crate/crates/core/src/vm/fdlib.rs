//! Prolog surface of the FD engine: domains, fd_tell/1 and the `#`
//! relations.

use super::builtins::ok;
use super::machine::*;
use super::word::{atoms, Word};
use crate::fd::{ArgVal, PType, Range, MAX_INTEGER};

macro_rules! natives {
    ($( $name:literal / $arity:literal => $f:expr ),* $(,)?) => {
        vec![$( NativeDef { name: $name, arity: $arity, f: $f } ),*]
    };
}

pub fn natives() -> Vec<NativeDef> {
    natives![
        "fd_domain"/3 => fd_domain,
        "fd_tell"/1 => fd_tell,
        "#="/2 => |m| relation(m, Rel::Eq),
        "#\\="/2 => |m| relation(m, Rel::Ne),
        "#<"/2 => |m| relation(m, Rel::Lt),
        "#=<"/2 => |m| relation(m, Rel::Le),
        "#>"/2 => |m| relation(m, Rel::Gt),
        "#>="/2 => |m| relation(m, Rel::Ge),
        "fd_min"/2 => |m| accessor(m, |r| r.min().unwrap_or(0)),
        "fd_max"/2 => |m| accessor(m, |r| r.max().unwrap_or(0)),
        "fd_size"/2 => |m| accessor(m, |r| r.size()),
        "fd_dom"/2 => fd_dom,
        "fd_var"/1 => |m| ok(matches!(m.deref(m.x[0]), Word::Fdv(_))),
        "$fd_remove"/2 => fd_remove,
        "$fd_vars"/2 => fd_vars,
        "$fd_pick_ff"/3 => pick_ff,
    ]
}

/// Largest domain `fd_dom/2` lists.
const MAX_DOM_LIST: i64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Rel {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

/// a1·X1 + ... + an·Xn + c
#[derive(Clone, Debug, Default)]
struct Lin {
    terms: Vec<(i64, u32)>,
    c: i64,
}

impl Lin {
    fn scale(mut self, k: i64) -> Lin {
        for t in &mut self.terms {
            t.0 = t.0.saturating_mul(k);
        }
        self.c = self.c.saturating_mul(k);
        self
    }

    fn add(mut self, o: Lin) -> Lin {
        for (a, v) in o.terms {
            match self.terms.iter_mut().find(|t| t.1 == v) {
                Some(t) => t.0 = t.0.saturating_add(a),
                None => self.terms.push((a, v)),
            }
        }
        self.c = self.c.saturating_add(o.c);
        self.terms.retain(|t| t.0 != 0);
        self
    }

    fn single(&self) -> Option<u32> {
        match self.terms.as_slice() {
            [(1, v)] if self.c == 0 => Some(*v),
            _ => None,
        }
    }
}

impl Machine {
    /// Turn the unbound heap cell `a` into an FD variable.
    fn fd_attach(&mut self, a: usize, dom: Range) -> Option<u32> {
        let v = self.fd.new_var(dom, a)?;
        self.heap[a] = Word::Fdv(v);
        if a < self.hb() {
            self.trail.push(TrailEntry::Bind(a));
        }
        Some(v)
    }

    fn fd_const(&mut self, n: i64) -> Option<u32> {
        self.fd.new_var(Range::single(n), usize::MAX)
    }

    fn fd_fresh(&mut self) -> u32 {
        let w = self.new_var();
        let Word::Ref(a) = w else { unreachable!() };
        self.fd_attach(a, Range::interval(0, MAX_INTEGER)).expect("non-empty")
    }

    /// An FD variable for a word: existing, fresh, or a constant.
    fn fd_of(&mut self, w: Word) -> Res<Option<u32>> {
        match self.deref(w) {
            Word::Fdv(v) => Ok(Some(v)),
            Word::Ref(a) => Ok(self.fd_attach(a, Range::interval(0, MAX_INTEGER))),
            Word::Int(n) => Ok(self.fd_const(n)),
            w => Err(self.type_error("fd_variable", w)),
        }
    }

    fn fd_post(&mut self, name: &str, args: Vec<ArgVal>) -> bool {
        let spec = self.fd.registry.get(name, args.len()).unwrap_or_else(|| panic!("{name} registered"));
        self.fd.post(spec, args)
    }

    fn lin(&mut self, w: Word) -> Res<Option<Lin>> {
        let w = self.deref(w);
        match w {
            Word::Int(n) => Ok(Some(Lin { terms: vec![], c: n })),
            Word::Ref(_) | Word::Fdv(_) => match self.fd_of(w)? {
                Some(v) => Ok(Some(Lin { terms: vec![(1, v)], c: 0 })),
                None => Ok(None),
            },
            Word::Stc(_) => {
                let (f, n) = self.functor_of(w).unwrap();
                let name = self.atoms.name(f).to_string();
                let a = self.arg_of(w, 0);
                if n == 1 && (name == "-" || name == "+") {
                    let Some(x) = self.lin(a)? else { return Ok(None) };
                    return Ok(Some(if name == "-" { x.scale(-1) } else { x }));
                }
                if n != 2 {
                    return Err(self.type_error("fd_evaluable", w));
                }
                let b = self.arg_of(w, 1);
                let (Some(x), Some(y)) = (self.lin(a)?, self.lin(b)?) else { return Ok(None) };
                match name.as_str() {
                    "+" => Ok(Some(x.add(y))),
                    "-" => Ok(Some(x.add(y.scale(-1)))),
                    "*" => {
                        if x.terms.is_empty() {
                            return Ok(Some(y.scale(x.c)));
                        }
                        if y.terms.is_empty() {
                            return Ok(Some(x.scale(y.c)));
                        }
                        let (Some(p), Some(q)) = (self.materialize(x), self.materialize(y)) else { return Ok(None) };
                        let z = self.fd_fresh();
                        if !self.fd_post("x_times_y_eq_z", vec![ArgVal::Var(p), ArgVal::Var(q), ArgVal::Var(z)]) {
                            return Ok(None);
                        }
                        Ok(Some(Lin { terms: vec![(1, z)], c: 0 }))
                    }
                    _ => Err(self.type_error("fd_evaluable", w)),
                }
            }
            _ => Err(self.type_error("fd_evaluable", w)),
        }
    }

    /// A single variable equal to a linear form; `None` on failure.
    fn materialize(&mut self, l: Lin) -> Option<u32> {
        if let Some(v) = l.single() {
            return Some(v);
        }
        if l.terms.is_empty() {
            return self.fd_const(l.c);
        }
        let z = self.fd_fresh();
        let zl = Lin { terms: vec![(1, z)], c: 0 };
        self.post_rel(l, Rel::Eq, zl).then_some(z)
    }

    /// Sum of positive-coefficient terms as one variable.
    fn side(&mut self, terms: Vec<(i64, u32)>) -> Option<u32> {
        let mut acc: Option<u32> = None;
        for (a, x) in terms {
            let t = if a == 1 {
                x
            } else {
                let y = self.fd_fresh();
                if !self.fd_post("ax_eq_y", vec![ArgVal::Int(a), ArgVal::Var(x), ArgVal::Var(y)]) {
                    return None;
                }
                y
            };
            acc = Some(match acc {
                None => t,
                Some(s) => {
                    let z = self.fd_fresh();
                    if !self.fd_post("x_plus_y_eq_z", vec![ArgVal::Var(s), ArgVal::Var(t), ArgVal::Var(z)]) {
                        return None;
                    }
                    z
                }
            });
        }
        acc
    }

    /// Post `l rel r` after normalizing to `X rel Y + c`.
    fn post_rel(&mut self, l: Lin, rel: Rel, r: Lin) -> bool {
        let d = l.add(r.scale(-1));
        let (pos, neg): (Vec<_>, Vec<_>) = d.terms.iter().partition(|t| t.0 > 0);
        let neg: Vec<(i64, u32)> = neg.into_iter().map(|(a, v)| (-a, v)).collect();
        // pos + d.c rel neg, i.e. pos rel neg + c
        let c = -d.c;
        let lv = if pos.is_empty() { None } else { self.side(pos.clone()) };
        if !pos.is_empty() && lv.is_none() {
            return false;
        }
        let rv = if neg.is_empty() { None } else { self.side(neg.clone()) };
        if !neg.is_empty() && rv.is_none() {
            return false;
        }
        use ArgVal::{Int, Var};
        match (lv, rv) {
            (None, None) => match rel {
                Rel::Eq => 0 == c,
                Rel::Ne => 0 != c,
                Rel::Lt => 0 < c,
                Rel::Le => 0 <= c,
                Rel::Gt => 0 > c,
                Rel::Ge => 0 >= c,
            },
            (Some(x), None) => match rel {
                Rel::Eq => self.fd_post("x_eq_c", vec![Var(x), Int(c)]),
                Rel::Ne => self.fd_post("x_neq_c", vec![Var(x), Int(c)]),
                Rel::Le => self.fd_post("x_lte_c", vec![Var(x), Int(c)]),
                Rel::Lt => self.fd_post("x_lte_c", vec![Var(x), Int(c - 1)]),
                Rel::Ge => self.fd_post("x_gte_c", vec![Var(x), Int(c)]),
                Rel::Gt => self.fd_post("x_gte_c", vec![Var(x), Int(c + 1)]),
            },
            // 0 rel Y + c, i.e. -c rel Y
            (None, Some(y)) => match rel {
                Rel::Eq => self.fd_post("x_eq_c", vec![Var(y), Int(-c)]),
                Rel::Ne => self.fd_post("x_neq_c", vec![Var(y), Int(-c)]),
                Rel::Le => self.fd_post("x_gte_c", vec![Var(y), Int(-c)]),
                Rel::Lt => self.fd_post("x_gte_c", vec![Var(y), Int(1 - c)]),
                Rel::Ge => self.fd_post("x_lte_c", vec![Var(y), Int(-c)]),
                Rel::Gt => self.fd_post("x_lte_c", vec![Var(y), Int(-c - 1)]),
            },
            (Some(x), Some(y)) => match rel {
                Rel::Eq if c == 0 => self.fd_post("x_eq_y", vec![Var(x), Var(y)]),
                Rel::Eq if c > 0 => self.fd_post("x_plus_c_eq_y", vec![Var(y), Int(c), Var(x)]),
                Rel::Eq => self.fd_post("x_plus_c_eq_y", vec![Var(x), Int(-c), Var(y)]),
                Rel::Ne if c == 0 => self.fd_post("x_neq_y", vec![Var(x), Var(y)]),
                Rel::Ne => self.fd_post("x_neq_y_plus_c", vec![Var(x), Var(y), Int(c)]),
                Rel::Le if c == 0 => self.fd_post("x_lte_y", vec![Var(x), Var(y)]),
                Rel::Le => self.fd_post("x_lte_y_plus_c", vec![Var(x), Var(y), Int(c)]),
                Rel::Lt => self.fd_post("x_lte_y_plus_c", vec![Var(x), Var(y), Int(c - 1)]),
                Rel::Ge if c == 0 => self.fd_post("x_lte_y", vec![Var(y), Var(x)]),
                Rel::Ge => self.fd_post("x_lte_y_plus_c", vec![Var(y), Var(x), Int(-c)]),
                Rel::Gt => self.fd_post("x_lte_y_plus_c", vec![Var(y), Var(x), Int(-c - 1)]),
            },
        }
    }

    /// Run an FD operation with the store synced to the current choice
    /// point, then move its effects onto the trail.
    fn fd_run(&mut self, f: impl FnOnce(&mut Machine) -> Res<bool>) -> Res<Ctl> {
        self.fd_sync();
        let r = f(self);
        if !matches!(r, Ok(true)) {
            self.fd.clear_queue();
        }
        self.fd_commit();
        ok(r?)
    }
}

fn relation(m: &mut Machine, rel: Rel) -> Res<Ctl> {
    let (a, b) = (m.x[0], m.x[1]);
    m.fd_run(|m| {
        let (Some(l), Some(r)) = (m.lin(a)?, m.lin(b)?) else { return Ok(false) };
        Ok(m.post_rel(l, rel, r))
    })
}

fn fd_domain(m: &mut Machine) -> Res<Ctl> {
    let lo = m.int_arg(m.x[1])?;
    let hi = m.int_arg(m.x[2])?;
    let vars = match m.deref(m.x[0]) {
        w @ (Word::Lst(_) | Word::Atm(atoms::NIL)) => m.list_arg(w)?,
        w => vec![w],
    };
    let r = Range::interval(lo.max(0), hi.min(MAX_INTEGER));
    m.fd_run(|m| {
        for w in vars {
            match m.deref(w) {
                Word::Ref(a) => {
                    if m.fd_attach(a, r.clone()).is_none() {
                        return Ok(false);
                    }
                }
                Word::Fdv(v) => {
                    if !(m.fd.tell(v, &r) && m.fd.propagate()) {
                        return Ok(false);
                    }
                }
                Word::Int(n) => {
                    if !r.contains(n) {
                        return Ok(false);
                    }
                }
                w => return Err(m.type_error("integer", w)),
            }
        }
        Ok(true)
    })
}

fn fd_tell(m: &mut Machine) -> Res<Ctl> {
    let c = m.x[0];
    let (f, n) = m.callable_arg(c)?;
    let name = m.atoms.name(f).to_string();
    let Some(sig) = m.fd.signature(&name, n) else {
        return Err(m.existence_error(f, n));
    };
    m.fd_run(|m| {
        let mut args = Vec::new();
        for (i, ty) in sig.iter().enumerate() {
            let w = m.arg_of(c, i);
            args.push(match ty {
                PType::Int => ArgVal::Int(m.int_arg(w)?),
                PType::Fdv => match m.fd_of(w)? {
                    Some(v) => ArgVal::Var(v),
                    None => return Ok(false),
                },
                PType::LInt => {
                    let items = m.list_arg(w)?;
                    let mut v = Vec::new();
                    for x in items {
                        v.push(m.int_arg(x)?);
                    }
                    ArgVal::Ints(v.into())
                }
                PType::LFdv => {
                    let items = m.list_arg(w)?;
                    let mut v = Vec::new();
                    for x in items {
                        match m.fd_of(x)? {
                            Some(x) => v.push(x),
                            None => return Ok(false),
                        }
                    }
                    ArgVal::Vars(v.into())
                }
            });
        }
        let spec = m.fd.registry.get(&name, n).expect("signature implies spec");
        Ok(m.fd.post(spec, args))
    })
}

fn dom_of(m: &mut Machine, w: Word) -> Res<Range> {
    match m.deref(w) {
        Word::Int(n) => Ok(Range::single(n)),
        Word::Fdv(v) => Ok(m.fd.dom(v).clone()),
        Word::Ref(_) => Ok(Range::interval(0, MAX_INTEGER)),
        w => Err(m.type_error("fd_variable", w)),
    }
}

fn accessor(m: &mut Machine, f: fn(&Range) -> i64) -> Res<Ctl> {
    let r = dom_of(m, m.x[0])?;
    ok(m.unify(m.x[1], Word::Int(f(&r))))
}

fn fd_dom(m: &mut Machine) -> Res<Ctl> {
    let r = dom_of(m, m.x[0])?;
    if r.size() > MAX_DOM_LIST {
        return Err(m.representation_error("max_fd_list"));
    }
    let vals: Vec<Word> = r.values().map(Word::Int).collect();
    let w = m.make_list(&vals, Word::Atm(atoms::NIL));
    ok(m.unify(m.x[1], w))
}

fn fd_remove(m: &mut Machine) -> Res<Ctl> {
    let n = m.int_arg(m.x[1])?;
    match m.deref(m.x[0]) {
        Word::Int(k) => ok(k != n),
        Word::Fdv(v) => m.fd_run(|m| {
            let r = Range::single(n).complement();
            Ok(m.fd.tell(v, &r) && m.fd.propagate())
        }),
        w => Err(m.type_error("fd_variable", w)),
    }
}

fn fd_vars(m: &mut Machine) -> Res<Ctl> {
    let items = m.list_arg(m.x[0])?;
    let mut out = Vec::new();
    m.fd_sync();
    for w in items {
        match m.deref(w) {
            Word::Int(n) => out.push(Word::Int(n)),
            Word::Fdv(v) => out.push(m.storable(Word::Fdv(v))),
            Word::Ref(a) => {
                m.fd_attach(a, Range::interval(0, MAX_INTEGER));
                out.push(Word::Ref(a));
            }
            w => {
                m.fd_commit();
                return Err(m.type_error("integer", w));
            }
        }
    }
    m.fd_commit();
    let l = m.make_list(&out, Word::Atm(atoms::NIL));
    ok(m.unify(m.x[1], l))
}

fn pick_ff(m: &mut Machine) -> Res<Ctl> {
    let items = m.list_arg(m.x[0])?;
    let mut best: Option<(i64, usize)> = None;
    for (i, w) in items.iter().enumerate() {
        if let Word::Fdv(v) = m.deref(*w) {
            let s = m.fd.dom(v).size();
            if best.is_none_or(|(bs, _)| s < bs) {
                best = Some((s, i));
            }
        }
    }
    let Some((_, k)) = best else { return Ok(Ctl::Fail) };
    let rest: Vec<Word> = items
        .iter()
        .enumerate()
        .filter(|(i, w)| *i != k && matches!(m.deref(**w), Word::Fdv(_)))
        .map(|(_, w)| *w)
        .collect();
    let l = m.make_list(&rest, Word::Atm(atoms::NIL));
    ok(m.unify(m.x[1], items[k]) && m.unify(m.x[2], l))
}

