//! Finite-domain checks: constraint translation, random CSPs against a
//! set-based fixpoint oracle, benchmarks and store invariants.

use std::collections::BTreeSet;

use gpl_core::fd::{Chain, Trig};
use gpl_core::reader::{parse_term, OpTable};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::{machine, sols};

/// `X #=< Y` installs exactly `X in 0..max(Y)` and `Y in min(X)..max_integer`.
pub fn criterion_6() -> Result<(), String> {
    let mut m = machine();
    let rt = parse_term("fd_domain([X,Y],0,10), X #=< Y", &OpTable::default()).unwrap();
    let before = m.fd.frames.len();
    let mut q = m.start_query(&rt);
    if !m.next(&mut q).map_err(|e| e.to_string())? {
        return Err("X #=< Y failed".into());
    }
    let infos: Vec<_> = (before..m.fd.frames.len()).map(|f| m.fd.frame_info(f as u32)).collect();
    m.close(q);
    if infos.len() != 2 {
        return Err(format!("expected 2 frames, got {infos:?}"));
    }
    let (a, b) = (&infos[0], &infos[1]);
    let want = ["X in 0..max(Y)", "Y in min(X)..max_integer"];
    if a.text != want[0] || b.text != want[1] {
        return Err(format!("primitives {:?} {:?}", a.text, b.text));
    }
    if a.owner == b.owner
        || a.triggers != [(b.owner, Trig::Max)]
        || b.triggers != [(a.owner, Trig::Min)]
        || a.chains != [(b.owner, Chain::Max)]
        || b.chains != [(a.owner, Chain::Min)]
    {
        return Err(format!("trigger sets {a:?} {b:?}"));
    }
    Ok(())
}

#[derive(Clone, Debug)]
enum Con {
    /// X #= Y + c
    Eq(usize, usize, i64),
    /// X #\= Y + c
    Ne(usize, usize, i64),
    /// X #=< Y + c
    Le(usize, usize, i64),
    Elem(usize, Vec<i64>, usize),
    /// B is 1 exactly when X = c.
    Reif(usize, i64, usize),
}

type Dom = BTreeSet<i64>;

fn rel_text(x: usize, op: &str, y: usize, c: i64) -> String {
    match c {
        0 => format!("_X{x} {op} _X{y}"),
        c if c > 0 => format!("_X{x} {op} _X{y} + {c}"),
        c => format!("_X{x} {op} _X{y} - {}", -c),
    }
}

impl Con {
    fn text(&self) -> String {
        match self {
            Con::Eq(x, y, c) => rel_text(*x, "#=", *y, *c),
            Con::Ne(x, y, c) => rel_text(*x, "#\\=", *y, *c),
            Con::Le(x, y, c) => rel_text(*x, "#=<", *y, *c),
            Con::Elem(i, l, v) => format!("element(_X{i}, {l:?}, _X{v})").replace(' ', ""),
            Con::Reif(x, c, b) => format!("'x=c <=> b'(_X{x}, {c}, _X{b})"),
        }
    }

    fn holds(&self, a: &[i64]) -> bool {
        match *self {
            Con::Eq(x, y, c) => a[x] == a[y] + c,
            Con::Ne(x, y, c) => a[x] != a[y] + c,
            Con::Le(x, y, c) => a[x] <= a[y] + c,
            Con::Elem(i, ref l, v) => a[i] >= 1 && (a[i] as usize) <= l.len() && l[a[i] as usize - 1] == a[v],
            Con::Reif(x, c, b) => (a[b] == 1) == (a[x] == c) && (a[b] == 0 || a[b] == 1),
        }
    }

    /// One narrowing step with the propagation strength of the installed
    /// definitions: bounds for `#=` and `#=<`, value removal for `#\=`,
    /// full support for element, case analysis for the reified form.
    fn narrow(&self, d: &mut [Dom]) {
        let lo = |s: &Dom| *s.first().unwrap_or(&i64::MAX);
        let hi = |s: &Dom| *s.last().unwrap_or(&i64::MIN);
        let single = |s: &Dom| if s.len() == 1 { s.first().copied() } else { None };
        match *self {
            Con::Eq(x, y, c) => {
                let (l, h) = (lo(&d[y]).saturating_add(c), hi(&d[y]).saturating_add(c));
                d[x].retain(|&v| l <= v && v <= h);
                let (l, h) = (lo(&d[x]).saturating_sub(c), hi(&d[x]).saturating_sub(c));
                d[y].retain(|&v| l <= v && v <= h);
            }
            Con::Ne(x, y, c) => {
                if let Some(v) = single(&d[y]) {
                    d[x].remove(&(v + c));
                }
                if let Some(v) = single(&d[x]) {
                    d[y].remove(&(v - c));
                }
            }
            Con::Le(x, y, c) => {
                let h = hi(&d[y]).saturating_add(c);
                d[x].retain(|&v| v <= h);
                let l = lo(&d[x]).saturating_sub(c);
                d[y].retain(|&v| v >= l);
            }
            Con::Elem(i, ref l, v) => {
                d[i].retain(|&j| j >= 1 && (j as usize) <= l.len());
                let vals: Dom = d[i].iter().map(|&j| l[j as usize - 1]).collect();
                d[v].retain(|x| vals.contains(x));
                let dv = d[v].clone();
                d[i].retain(|&j| dv.contains(&l[j as usize - 1]));
            }
            Con::Reif(x, c, b) => {
                if hi(&d[b]) == 0 {
                    d[x].remove(&c);
                }
                if lo(&d[b]) == 1 {
                    d[x].retain(|&v| v == c);
                }
                if lo(&d[x]) > c || hi(&d[x]) < c {
                    d[b].retain(|&v| v == 0);
                }
                if single(&d[x]) == Some(c) {
                    d[b].retain(|&v| v == 1);
                }
            }
        }
    }
}

/// Greatest common fixpoint of the narrowing steps; `None` on a wipe-out.
fn fixpoint(cons: &[Con], doms: &[Dom]) -> Option<Vec<Dom>> {
    let mut d = doms.to_vec();
    loop {
        let before = d.clone();
        for c in cons {
            c.narrow(&mut d);
            if d.iter().any(|s| s.is_empty()) {
                return None;
            }
        }
        if d == before {
            return Some(d);
        }
    }
}

fn enumerate(cons: &[Con], doms: &[Dom]) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(k: usize, doms: &[Dom], cons: &[Con], cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if k == doms.len() {
            if cons.iter().all(|c| c.holds(cur)) {
                out.push(cur.clone());
            }
            return;
        }
        for &v in &doms[k] {
            cur.push(v);
            go(k + 1, doms, cons, cur, out);
            cur.pop();
        }
    }
    go(0, doms, cons, &mut cur, &mut out);
    out
}

fn random_csp(rng: &mut StdRng) -> (Vec<Dom>, Vec<Con>) {
    let n = rng.gen_range(2..=5);
    let mut doms: Vec<Dom> = (0..n)
        .map(|_| {
            let s: Dom = (0..10).filter(|_| rng.gen_bool(0.6)).collect();
            if s.is_empty() {
                [rng.gen_range(0..10)].into()
            } else {
                s
            }
        })
        .collect();
    let mut cons = Vec::new();
    for _ in 0..rng.gen_range(1..=4) {
        let x = rng.gen_range(0..n);
        let mut y = rng.gen_range(0..n - 1);
        if y >= x {
            y += 1;
        }
        let c = rng.gen_range(-2..=2);
        cons.push(match rng.gen_range(0..5) {
            0 => Con::Eq(x, y, c),
            1 => Con::Ne(x, y, c),
            2 => Con::Le(x, y, c),
            3 => Con::Elem(x, (0..rng.gen_range(1..=5)).map(|_| rng.gen_range(0..10)).collect(), y),
            _ => {
                doms[y].retain(|&v| v <= 1);
                if doms[y].is_empty() {
                    doms[y] = [0, 1].into();
                }
                Con::Reif(x, rng.gen_range(0..10), y)
            }
        });
    }
    (doms, cons)
}

fn setup_text(doms: &[Dom], cons: &[Con]) -> String {
    let mut goals = Vec::new();
    for (i, d) in doms.iter().enumerate() {
        goals.push(format!("fd_domain(_X{i}, 0, 9)"));
        for v in (0..10).filter(|v| !d.contains(v)) {
            goals.push(format!("_X{i} #\\= {v}"));
        }
    }
    goals.extend(cons.iter().map(Con::text));
    goals.join(", ")
}

const DOM_LISTS: &str = "
dl(X, [X]) :- integer(X), !.
dl(X, L) :- fd_dom(X, L).
dls([], []).
dls([X|Xs], [L|Ls]) :- dl(X, L), dls(Xs, Ls).
";

fn parse_doms(s: &str) -> Vec<Dom> {
    let inner = &s[2..s.len() - 2];
    inner.split("],[").map(|d| d.split(',').map(|t| t.parse().unwrap()).collect()).collect()
}

fn parse_ints(s: &str) -> Vec<i64> {
    s.trim_matches(|c| c == '[' || c == ']').split(',').map(|t| t.parse().unwrap_or_else(|_| panic!("not an integer list: {s}"))).collect()
}

/// Random CSPs: domains after propagation match the fixpoint oracle and
/// labeling finds exactly the enumerated solutions.
pub fn criterion_7() -> Result<(), String> {
    let (failed, solutions) = random_csps(500, 0x005e_edfd, false)?;
    eprintln!("fd random: 500 instances, {failed} failing at propagation, {solutions} labeled solutions");
    Ok(())
}

/// Run `count` random instances; with `sparse` every domain is stored as
/// a bit vector. Returns instances failing at propagation and the number
/// of labeled solutions.
pub fn random_csps(count: usize, seed: u64, sparse: bool) -> Result<(usize, usize), String> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut m = machine();
    m.fd.force_sparse = sparse;
    m.consult_text(DOM_LISTS, "dom_lists").map_err(|e| e.to_string())?;
    let (mut failed, mut solutions) = (0, 0);
    for k in 0..count {
        let (doms, cons) = random_csp(&mut rng);
        let n = doms.len();
        let setup = setup_text(&doms, &cons);
        let vars: Vec<String> = (0..n).map(|i| format!("_X{i}")).collect();
        let q = format!("{setup}, dls([{}], Ds)", vars.join(","));
        let got = sols(&mut m, &q);
        let want = fixpoint(&cons, &doms);
        match (&want, got.as_slice()) {
            (None, []) => failed += 1,
            (Some(w), [one]) => {
                let ds = parse_doms(&one[3..]);
                if ds != *w {
                    return Err(format!("instance {k}: {q}\n  vm: {ds:?}\n  oracle: {w:?}"));
                }
            }
            _ => return Err(format!("instance {k}: {q}\n  vm: {got:?}\n  oracle: {want:?}")),
        }
        let lq = format!("{setup}, fd_labeling([{0}]), L = [{0}]", vars.join(","));
        let mut got: Vec<Vec<i64>> = sols(&mut m, &lq).iter().map(|s| parse_ints(&s[2..])).collect();
        got.sort();
        let want = enumerate(&cons, &doms);
        if got != want {
            return Err(format!("instance {k}: labeling {lq}\n  vm: {} solutions\n  oracle: {}", got.len(), want.len()));
        }
        solutions += want.len();
    }
    Ok((failed, solutions))
}

pub const FD_BENCH: &str = "
queens(N, Qs) :- length(Qs, N), fd_domain(Qs, 1, N), safe(Qs), fd_labeling(Qs).
safe([]).
safe([Q|Qs]) :- noattack(Q, Qs, 1), safe(Qs).
noattack(_, [], _).
noattack(Q, [Q1|Qs], D) :- Q #\\= Q1, Q #\\= Q1 + D, Q1 #\\= Q + D, D1 is D + 1, noattack(Q, Qs, D1).
send([S,E,N,D,M,O,R,Y]) :-
    fd_domain([S,E,N,D,M,O,R,Y], 0, 9), S #\\= 0, M #\\= 0,
    fd_all_different([S,E,N,D,M,O,R,Y]),
    1000*S + 100*E + 10*N + D + 1000*M + 100*O + 10*R + E #= 10000*M + 1000*O + 100*N + 10*E + Y,
    fd_labeling([S,E,N,D,M,O,R,Y]).
";

/// Placements of n non-attacking queens, by plain backtracking.
pub fn queens_oracle(n: usize) -> Vec<Vec<i64>> {
    fn go(n: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let k = cur.len() as i64;
        for q in 1..=n as i64 {
            if cur.iter().enumerate().all(|(i, &p)| p != q && (p - q).abs() != k - i as i64) {
                cur.push(q);
                go(n, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), &mut out);
    out
}

/// SEND+MORE=MONEY assignments by trying every injective digit map.
pub fn send_oracle() -> Vec<Vec<i64>> {
    fn go(cur: &mut Vec<i64>, used: &mut [bool; 10], out: &mut Vec<Vec<i64>>) {
        if cur.len() == 8 {
            let [s, e, n, d, m, o, r, y] = cur[..] else { unreachable!() };
            let num = |ds: &[i64]| ds.iter().fold(0, |a, d| a * 10 + d);
            if s != 0 && m != 0 && num(&[s, e, n, d]) + num(&[m, o, r, e]) == num(&[m, o, n, e, y]) {
                out.push(cur.clone());
            }
            return;
        }
        for v in 0..10 {
            if !used[v as usize] {
                used[v as usize] = true;
                cur.push(v);
                go(cur, used, out);
                cur.pop();
                used[v as usize] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut [false; 10], &mut out);
    out
}

fn bench_solutions(m: &mut gpl_core::vm::Machine, goal: &str) -> Vec<Vec<i64>> {
    let mut v: Vec<Vec<i64>> = sols(m, goal).iter().map(|s| parse_ints(s.split_once('=').unwrap().1)).collect();
    v.sort();
    v
}

/// SEND+MORE, 4-queens and 8-queens solutions equal the exhaustive oracles.
pub fn criterion_8() -> Result<(), String> {
    let mut m = machine();
    m.consult_text(FD_BENCH, "fd_bench").map_err(|e| e.to_string())?;
    let send = bench_solutions(&mut m, "send(L)");
    let want = send_oracle();
    if send != want || want != [vec![9, 5, 6, 7, 1, 0, 8, 2]] {
        return Err(format!("send: {send:?}, oracle {want:?}"));
    }
    for n in [4, 8] {
        let got = bench_solutions(&mut m, &format!("queens({n}, Q)"));
        let want = queens_oracle(n);
        if got != want {
            return Err(format!("{n}-queens: {} solutions, oracle {}", got.len(), want.len()));
        }
    }
    Ok(())
}

/// Under instrumentation the benchmark suite never trails a domain twice
/// in one choice point and never schedules a (variable, chain) pair twice
/// in one wave.
pub fn criterion_9() -> Result<(), String> {
    let mut m = machine();
    m.consult_text(FD_BENCH, "fd_bench").map_err(|e| e.to_string())?;
    m.fd.stats.instrument = true;
    for g in ["send(L)", "queens(4, Q)", "queens(8, Q)", "queens(6, Q)"] {
        sols(&mut m, g);
    }
    let s = &m.fd.stats;
    if s.dom_trails == 0 || s.waves == 0 {
        return Err("instrumentation recorded nothing".into());
    }
    if s.trail_violations != 0 || s.sched_violations != 0 {
        return Err(format!("trail violations {}, schedule violations {}", s.trail_violations, s.sched_violations));
    }
    eprintln!("fd stats: {} domain trails, {} waves, {} frames run", s.dom_trails, s.waves, s.frames_run);
    Ok(())
}
