//! A small depth-first Prolog interpreter over reader terms, used as an
//! independent oracle for the compiled pipeline.

use std::collections::HashMap;
use std::rc::Rc;

use gpl_core::reader::{parse_term, read_all, write_prio, OpTable, WriteOpts};
use gpl_core::term::{Term, Var};

#[derive(Debug, PartialEq)]
enum Flow {
    Continue,
    /// A cut to the given barrier ran; alternatives up to it are dropped.
    Cut(usize),
    Stop,
}

/// Goal list: each goal carries the barrier its cuts refer to.
enum Goals {
    Nil,
    Cons(Term, usize, Rc<Goals>),
}

pub struct Oracle {
    clauses: HashMap<(String, usize), Vec<Term>>,
    bind: HashMap<usize, Term>,
    trail: Vec<usize>,
    next_var: usize,
    next_barrier: usize,
    steps: u64,
    pub max_steps: u64,
}

impl Oracle {
    pub fn new(src: &str) -> Result<Oracle, String> {
        let mut clauses: HashMap<(String, usize), Vec<Term>> = HashMap::new();
        for r in read_all(src, &OpTable::default()) {
            let t = r.map_err(|e| e.to_string())?.term;
            let head = match &t {
                Term::Compound(f, a) if f == ":-" && a.len() == 2 => a[0].clone(),
                Term::Compound(f, a) if f == ":-" && a.len() == 1 => return Err("directives are not supported".into()),
                _ => t.clone(),
            };
            let key = match &head {
                Term::Atom(a) => (a.clone(), 0),
                Term::Compound(f, a) => (f.clone(), a.len()),
                _ => return Err(format!("bad head {head}")),
            };
            clauses.entry(key).or_default().push(t);
        }
        Ok(Oracle {
            clauses,
            bind: HashMap::new(),
            trail: Vec::new(),
            next_var: 1 << 32,
            next_barrier: 1,
            steps: 0,
            max_steps: 5_000_000,
        })
    }

    fn walk(&self, t: &Term) -> Term {
        let mut t = t.clone();
        while let Term::Var(v) = &t {
            match self.bind.get(&v.id) {
                Some(b) => t = b.clone(),
                None => break,
            }
        }
        t
    }

    fn resolve(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::Compound(f, a) => Term::Compound(f, a.iter().map(|x| self.resolve(x)).collect()),
            t => t,
        }
    }

    fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let (a, b) = (self.walk(a), self.walk(b));
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x.id == y.id => true,
            (Term::Var(x), _) => {
                self.bind.insert(x.id, b.clone());
                self.trail.push(x.id);
                true
            }
            (_, Term::Var(y)) => {
                self.bind.insert(y.id, a.clone());
                self.trail.push(y.id);
                true
            }
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
            _ => a == b,
        }
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            self.bind.remove(&v);
        }
    }

    fn rename(&mut self, t: &Term, map: &mut HashMap<usize, usize>) -> Term {
        match t {
            Term::Var(v) => {
                let next = &mut self.next_var;
                let id = *map.entry(v.id).or_insert_with(|| {
                    *next += 1;
                    *next
                });
                Term::Var(Var { id, name: format!("_G{id}") })
            }
            Term::Compound(f, a) => Term::Compound(f.clone(), a.iter().map(|x| self.rename(x, map)).collect()),
            t => t.clone(),
        }
    }

    fn eval(&self, t: &Term) -> Result<i64, String> {
        match self.walk(t) {
            Term::Int(n) => Ok(n),
            Term::Compound(f, a) if a.len() == 2 => {
                let (x, y) = (self.eval(&a[0])?, self.eval(&a[1])?);
                match f.as_str() {
                    "+" => Ok(x + y),
                    "-" => Ok(x - y),
                    "*" => Ok(x * y),
                    "//" if y != 0 => Ok(x / y),
                    "mod" if y != 0 => {
                        let r = x.rem_euclid(y);
                        Ok(if y < 0 && r != 0 { r + y } else { r })
                    }
                    "min" => Ok(x.min(y)),
                    "max" => Ok(x.max(y)),
                    _ => Err(format!("cannot evaluate {f}/2")),
                }
            }
            Term::Compound(f, a) if a.len() == 1 && f == "-" => Ok(-self.eval(&a[0])?),
            Term::Compound(f, a) if a.len() == 1 && f == "abs" => Ok(self.eval(&a[0])?.abs()),
            t => Err(format!("cannot evaluate {t}")),
        }
    }

    fn push(goal: Term, barrier: usize, rest: Rc<Goals>) -> Rc<Goals> {
        Rc::new(Goals::Cons(goal, barrier, rest))
    }

    fn solve(&mut self, goals: Rc<Goals>, k: &mut dyn FnMut(&Oracle) -> bool) -> Result<Flow, String> {
        self.steps += 1;
        if self.steps > self.max_steps {
            return Err("step limit".into());
        }
        let (goal, cb, rest) = match &*goals {
            Goals::Nil => return Ok(if k(self) { Flow::Continue } else { Flow::Stop }),
            Goals::Cons(g, b, r) => (self.walk(g), *b, r.clone()),
        };
        let (name, args): (&str, &[Term]) = match &goal {
            Term::Atom(a) => (a.as_str(), &[]),
            Term::Compound(f, a) => (f.as_str(), a.as_slice()),
            Term::Var(_) => return Err("instantiation error".into()),
            t => return Err(format!("not callable: {t}")),
        };
        let det = |o: &mut Oracle, ok: bool, rest: Rc<Goals>, k: &mut dyn FnMut(&Oracle) -> bool| -> Result<Flow, String> {
            if ok {
                o.solve(rest, k)
            } else {
                Ok(Flow::Continue)
            }
        };
        match (name, args.len()) {
            ("true", 0) => return self.solve(rest, k),
            ("fail", 0) | ("false", 0) => return Ok(Flow::Continue),
            ("!", 0) => {
                return Ok(match self.solve(rest, k)? {
                    Flow::Continue => Flow::Cut(cb),
                    f => f,
                });
            }
            (",", 2) => {
                let r = Self::push(args[1].clone(), cb, rest);
                return self.solve(Self::push(args[0].clone(), cb, r), k);
            }
            (";", 2) => {
                let lhs = self.walk(&args[0]);
                if let Term::Compound(f, c) = &lhs {
                    if f == "->" && c.len() == 2 {
                        let local = self.fresh_barrier();
                        let mark = self.trail.len();
                        let then = Self::push(c[1].clone(), cb, rest.clone());
                        let cut = Self::push(Term::atom("!"), local, then);
                        let r = self.solve(Self::push(c[0].clone(), local, cut), k)?;
                        self.undo(mark);
                        return match r {
                            Flow::Cut(b) if b == local => Ok(Flow::Continue),
                            Flow::Continue => self.solve(Self::push(args[1].clone(), cb, rest), k),
                            f => Ok(f),
                        };
                    }
                }
                let mark = self.trail.len();
                let r = self.solve(Self::push(lhs, cb, rest.clone()), k)?;
                self.undo(mark);
                if r != Flow::Continue {
                    return Ok(r);
                }
                return self.solve(Self::push(args[1].clone(), cb, rest), k);
            }
            ("->", 2) => {
                let local = self.fresh_barrier();
                let then = Self::push(args[1].clone(), cb, rest);
                let cut = Self::push(Term::atom("!"), local, then);
                return Ok(match self.solve(Self::push(args[0].clone(), local, cut), k)? {
                    Flow::Cut(b) if b == local => Flow::Continue,
                    f => f,
                });
            }
            ("\\+", 1) => {
                let local = self.fresh_barrier();
                let mark = self.trail.len();
                let fail = Self::push(Term::atom("fail"), local, Rc::new(Goals::Nil));
                let cut = Self::push(Term::atom("!"), local, fail);
                let r = self.solve(Self::push(args[0].clone(), local, cut), &mut |_| true)?;
                self.undo(mark);
                return match r {
                    Flow::Cut(b) if b == local => Ok(Flow::Continue),
                    Flow::Continue => self.solve(rest, k),
                    f => Ok(f),
                };
            }
            ("call", 1) => {
                let local = self.fresh_barrier();
                return Ok(match self.solve(Self::push(args[0].clone(), local, rest), k)? {
                    Flow::Cut(b) if b == local => Flow::Continue,
                    f => f,
                });
            }
            ("=", 2) => {
                let mark = self.trail.len();
                let ok = self.unify(&args[0], &args[1]);
                let r = det(self, ok, rest, k);
                self.undo(mark);
                return r;
            }
            ("\\=", 2) => {
                let mark = self.trail.len();
                let ok = self.unify(&args[0], &args[1]);
                self.undo(mark);
                return det(self, !ok, rest, k);
            }
            ("==", 2) | ("\\==", 2) => {
                let same = self.resolve(&args[0]) == self.resolve(&args[1]);
                return det(self, same == (name == "=="), rest, k);
            }
            ("is", 2) => {
                let v = self.eval(&args[1])?;
                let mark = self.trail.len();
                let ok = self.unify(&args[0], &Term::Int(v));
                let r = det(self, ok, rest, k);
                self.undo(mark);
                return r;
            }
            ("<", 2) | (">", 2) | ("=<", 2) | (">=", 2) | ("=:=", 2) | ("=\\=", 2) => {
                let (x, y) = (self.eval(&args[0])?, self.eval(&args[1])?);
                let ok = match name {
                    "<" => x < y,
                    ">" => x > y,
                    "=<" => x <= y,
                    ">=" => x >= y,
                    "=:=" => x == y,
                    _ => x != y,
                };
                return det(self, ok, rest, k);
            }
            ("var", 1) | ("nonvar", 1) | ("atom", 1) | ("integer", 1) => {
                let t = self.walk(&args[0]);
                let ok = match name {
                    "var" => matches!(t, Term::Var(_)),
                    "nonvar" => !matches!(t, Term::Var(_)),
                    "atom" => matches!(t, Term::Atom(_)),
                    _ => matches!(t, Term::Int(_)),
                };
                return det(self, ok, rest, k);
            }
            _ => {}
        }
        let key = (name.to_string(), args.len());
        let Some(cls) = self.clauses.get(&key).cloned() else {
            return Err(format!("unknown procedure {name}/{}", args.len()));
        };
        let me = self.fresh_barrier();
        for c in &cls {
            let mut map = HashMap::new();
            let c = self.rename(c, &mut map);
            let (head, body) = match c {
                Term::Compound(f, mut a) if f == ":-" && a.len() == 2 => {
                    let b = a.pop().unwrap();
                    (a.pop().unwrap(), b)
                }
                t => (t, Term::atom("true")),
            };
            let mark = self.trail.len();
            let r = if self.unify(&head, &goal) { self.solve(Self::push(body, me, rest.clone()), k)? } else { Flow::Continue };
            self.undo(mark);
            match r {
                Flow::Continue => {}
                Flow::Cut(b) if b == me => return Ok(Flow::Continue),
                f => return Ok(f),
            }
        }
        Ok(Flow::Continue)
    }

    fn fresh_barrier(&mut self) -> usize {
        self.next_barrier += 1;
        self.next_barrier
    }

    /// Solutions of a query, each rendered as `Name=Value` pairs for the
    /// bound named variables, the way the top-level prints them.
    pub fn query(&mut self, q: &str) -> Result<Vec<String>, String> {
        std::thread::scope(|s| {
            std::thread::Builder::new()
                .stack_size(1 << 30)
                .spawn_scoped(s, || self.query_here(q))
                .unwrap()
                .join()
                .unwrap()
        })
    }

    fn query_here(&mut self, q: &str) -> Result<Vec<String>, String> {
        let ops = OpTable::default();
        let rt = parse_term(q, &ops).map_err(|e| e.to_string())?;
        let names = rt.var_names.clone();
        let mut out = Vec::new();
        let goals = Self::push(rt.term, 0, Rc::new(Goals::Nil));
        let mut k = |o: &Oracle| {
            let mut parts = Vec::new();
            for (n, v) in &names {
                if n.starts_with('_') {
                    continue;
                }
                let t = o.resolve(v);
                if t == *v {
                    continue;
                }
                let opts = WriteOpts { quoted: true, ignore_ops: false, numbervars: true };
                parts.push(format!("{n}={}", write_prio(&t, &ops, opts, 699)));
            }
            out.push(parts.join(","));
            true
        };
        self.solve(goals, &mut k)?;
        Ok(out.into_iter().map(|s| normalize_vars(&s)).collect())
    }
}

/// Replace generated variable names (`_G123`, `_123`) by `_`.
pub fn normalize_vars(s: &str) -> String {
    let mut out = String::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        if cs[i] == '_' && (i == 0 || !cs[i - 1].is_alphanumeric()) {
            let mut j = i + 1;
            if j < cs.len() && cs[j] == 'G' {
                j += 1;
            }
            let digits = cs[j..].iter().take_while(|c| c.is_ascii_digit()).count();
            if digits > 0 {
                out.push('_');
                i = j + digits;
                continue;
            }
        }
        out.push(cs[i]);
        i += 1;
    }
    out
}

/// Every corpus query gives the same ordered answers under the compiled
/// pipeline and under the interpreter.
pub fn criterion_5() -> Result<(), String> {
    let mut checked = 0;
    for p in super::corpus::CORPUS {
        let mut o = Oracle::new(p.src)?;
        let mut m = super::machine();
        m.consult_text(p.src, p.name).map_err(|e| format!("{}: {e}", p.name))?;
        for q in p.queries {
            let want = o.query(q).map_err(|e| format!("{}: {q}: oracle: {e}", p.name))?;
            let got: Vec<String> = super::sols(&mut m, q).iter().map(|s| normalize_vars(s)).collect();
            if got != want {
                return Err(format!("{}: {q}\n  vm:     {got:?}\n  oracle: {want:?}", p.name));
            }
            checked += 1;
        }
    }
    if super::corpus::CORPUS.len() < 20 {
        return Err("corpus too small".into());
    }
    eprintln!("differential: {checked} queries over {} programs", super::corpus::CORPUS.len());
    Ok(())
}
