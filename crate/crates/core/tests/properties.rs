use gpl_core::fd::{Range, MAX_INTEGER};
use gpl_core::reader::{parse_term, write_opts, OpTable, WriteOpts};
use gpl_core::term::{Term, Var};
use proptest::prelude::*;

const ATOMS: &[&str] = &["a", "foo_Bar", "hello world", "it's", "+", "-", "*", "[]", "{}", "!", ";", ",", "|", "Abc", "", "\\", "a.b", "->"];
const FUNCTORS: &[&str] = &["f", "+", "-", "*", "=", ":-", ",", ";", "->", "\\+", "g h", "^", "mod", "is", "{}", "[]", "."];

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        prop::sample::select(ATOMS).prop_map(Term::atom),
        (-1000i64..1000).prop_map(Term::Int),
        prop::sample::select(&[0.5f64, -2.25, 1.0e10, 3.0, 0.1][..]).prop_map(Term::Float),
        (0usize..3).prop_map(|k| Term::Var(Var { id: k, name: ["A", "B", "_C"][k].to_string() })),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (prop::sample::select(FUNCTORS), prop::collection::vec(inner.clone(), 1..4))
                .prop_map(|(f, args)| Term::compound(f, args)),
            prop::collection::vec(inner.clone(), 0..4).prop_map(Term::list),
            (prop::collection::vec(inner.clone(), 1..3), inner).prop_map(|(items, tail)| Term::list_from(items, tail)),
        ]
    })
}

proptest! {
    #[test]
    fn writeq_then_read_is_identity(t in term()) {
        let ops = OpTable::default();
        let opts = WriteOpts { quoted: true, ignore_ops: false, numbervars: false };
        let text = write_opts(&t, &ops, opts);
        let back = parse_term(&text, &ops).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert!(back.term.variant_of(&t), "{} read back as {}", text, back.term);
    }

    #[test]
    fn canonical_then_read_is_identity(t in term()) {
        let ops = OpTable::default();
        let opts = WriteOpts { quoted: true, ignore_ops: true, numbervars: false };
        let text = write_opts(&t, &ops, opts);
        let back = parse_term(&text, &ops).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert!(back.term.variant_of(&t), "{} read back as {}", text, back.term);
    }
}

#[test]
fn variant_check_is_discriminating() {
    let ops = OpTable::default();
    let t = parse_term("f(A, B, A)", &ops).unwrap().term;
    assert!(!t.variant_of(&parse_term("f(A, B, B)", &ops).unwrap().term));
    assert!(!t.variant_of(&parse_term("f(A, b, A)", &ops).unwrap().term));
    assert!(t.variant_of(&parse_term("f(X, Y, X)", &ops).unwrap().term));
}

#[derive(Clone, Debug)]
enum Expr {
    Interval(i64, i64),
    Values(Vec<i64>),
    Inter(Box<Expr>, Box<Expr>),
    Union(Box<Expr>, Box<Expr>),
    Compl(Box<Expr>),
    Remove(Box<Expr>, i64),
    Shift(Box<Expr>, i64),
}

/// Membership by definition.
fn member(e: &Expr, v: i64) -> bool {
    if !(0..=MAX_INTEGER).contains(&v) {
        return false;
    }
    match e {
        Expr::Interval(a, b) => *a <= v && v <= *b,
        Expr::Values(vs) => vs.contains(&v),
        Expr::Inter(a, b) => member(a, v) && member(b, v),
        Expr::Union(a, b) => member(a, v) || member(b, v),
        Expr::Compl(a) => !member(a, v),
        Expr::Remove(a, x) => v != *x && member(a, v),
        Expr::Shift(a, c) => member(a, v - c),
    }
}

fn eval(e: &Expr, sparse: bool) -> Range {
    let leaf = |r: Range| if sparse && r.size() < 1 << 16 { r.force_sparse() } else { r };
    match e {
        Expr::Interval(a, b) => leaf(Range::interval(*a, *b)),
        Expr::Values(vs) => leaf(Range::from_values(vs.iter().copied())),
        Expr::Inter(a, b) => eval(a, sparse).intersect(&eval(b, sparse)),
        Expr::Union(a, b) => eval(a, sparse).union(&eval(b, sparse)),
        Expr::Compl(a) => eval(a, sparse).complement(),
        Expr::Remove(a, x) => eval(a, sparse).remove(*x),
        Expr::Shift(a, c) => eval(a, sparse).shift(*c),
    }
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-5i64..150, 0i64..150).prop_map(|(a, w)| Expr::Interval(a, a + w)),
        prop::collection::vec(-3i64..150, 0..12).prop_map(Expr::Values),
    ];
    leaf.prop_recursive(4, 20, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Inter(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Union(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| Expr::Compl(Box::new(a))),
            (inner.clone(), 0i64..150).prop_map(|(a, x)| Expr::Remove(Box::new(a), x)),
            (inner, -20i64..20).prop_map(|(a, c)| Expr::Shift(Box::new(a), c)),
        ]
    })
}

/// Probe points: the small universe plus both ends of the value space.
fn probes() -> impl Iterator<Item = i64> {
    (-2..200).chain(MAX_INTEGER - 200..=MAX_INTEGER + 1)
}

proptest! {
    #[test]
    fn range_matches_membership_oracle(e in expr()) {
        let r = eval(&e, false);
        for v in probes() {
            prop_assert_eq!(r.contains(v), member(&e, v), "value {} of {:?} = {}", v, e, r);
        }
        let first = probes().find(|&v| member(&e, v));
        let last = probes().filter(|&v| member(&e, v)).last();
        if r.max().is_some_and(|m| m < 200) {
            prop_assert_eq!(r.size() as usize, probes().filter(|&v| member(&e, v)).count());
            prop_assert_eq!(r.max(), last);
        }
        if r.min().is_some_and(|m| m < 200) || r.is_empty() {
            prop_assert_eq!(r.min(), first);
        }
        prop_assert_eq!(r.is_empty(), r.size() == 0);
    }

    #[test]
    fn sparse_and_interval_forms_agree(e in expr()) {
        let (a, b) = (eval(&e, false), eval(&e, true));
        prop_assert!(a.same_values(&b), "{} vs {}", a, b);
        prop_assert_eq!(a.min(), b.min());
        prop_assert_eq!(a.max(), b.max());
        prop_assert_eq!(a.size(), b.size());
        prop_assert_eq!(a.runs(), b.runs());
    }

    #[test]
    fn runs_are_sorted_and_disjoint(e in expr()) {
        let runs = eval(&e, false).runs();
        for w in runs.windows(2) {
            prop_assert!(w[0].1 + 1 < w[1].0, "{:?}", runs);
        }
        prop_assert!(runs.iter().all(|(a, b)| a <= b && *a >= 0 && *b <= MAX_INTEGER));
    }
}

proptest! {
    #[test]
    fn singleton_in_either_form(e in expr()) {
        let (a, b) = (eval(&e, false), eval(&e, true));
        let want = if a.size() == 1 { a.min() } else { None };
        prop_assert_eq!(a.singleton(), want);
        prop_assert_eq!(b.singleton(), want);
    }
}

#[test]
fn prefix_operator_atom_as_left_operand() {
    let ops = OpTable::default();
    let opts = WriteOpts { quoted: true, ignore_ops: false, numbervars: false };
    for src in ["(\\)+a", "(-)-1", "(-)*b", "a- -", "(\\+)=x", ":-(*)", "f(-(-))", "\\+(\\+)"] {
        let t = parse_term(src, &ops).unwrap().term;
        let text = write_opts(&t, &ops, opts);
        assert!(parse_term(&text, &ops).unwrap().term.variant_of(&t), "{src} written as {text}");
    }
}
