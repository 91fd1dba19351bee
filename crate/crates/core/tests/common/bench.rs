//! Micro-benchmarks reported as timings only.

use std::time::{Duration, Instant};

const NREV: &str = "
app([], L, L).
app([H|T], L, [H|R]) :- app(T, L, R).
nrev([], []).
nrev([H|T], R) :- nrev(T, RT), app(RT, [H], R).
range(N, N, [N]) :- !.
range(I, N, [I|T]) :- J is I + 1, range(J, N, T).
bench(0) :- !.
bench(K) :- range(1, 30, L), nrev(L, _), K1 is K - 1, bench(K1).
fib(0, 0).
fib(1, 1).
fib(N, F) :- N > 1, A is N - 1, B is N - 2, fib(A, FA), fib(B, FB), F is FA + FB.
";

pub struct Timing {
    pub name: &'static str,
    pub best: Duration,
}

fn time(m: &mut gpl_core::vm::Machine, goal: &str, runs: usize) -> Duration {
    (0..runs)
        .map(|_| {
            let t = Instant::now();
            assert!(m.succeeds(goal).unwrap_or(false), "{goal}");
            t.elapsed()
        })
        .min()
        .unwrap()
}

pub fn run() -> Vec<Timing> {
    let mut m = super::machine();
    m.consult_text(NREV, "nrev").unwrap();
    m.consult_text(super::fdcheck::FD_BENCH, "fd_bench").unwrap();
    let cases: [(&str, &str); 5] = [
        ("nrev30 x200", "bench(200)"),
        ("fib(18)", "fib(18, _)"),
        ("8-queens all", "findall(Q, queens(8, Q), _)"),
        ("send+more", "send(_)"),
        ("compile corpus", "true"),
    ];
    let mut out = Vec::new();
    for (name, goal) in cases {
        let best = if name == "compile corpus" {
            let t = Instant::now();
            super::linkcheck::artifacts();
            t.elapsed()
        } else {
            time(&mut m, goal, 3)
        };
        out.push(Timing { name, best });
    }
    out
}

/// Timings are reported, never judged.
pub fn criterion_13() -> Result<(), String> {
    for t in run() {
        eprintln!("bench {:<16} {:>10.3} ms", t.name, t.best.as_secs_f64() * 1e3);
    }
    Ok(())
}
