mod common;

use common::{machine, sols};
use gpl_core::fd::{ArgVal, Range, Store, MAX_INTEGER};
use gpl_core::reader::{parse_term, OpTable};

fn post(s: &mut Store, name: &str, args: Vec<ArgVal>) -> bool {
    let spec = s.registry.get(name, args.len()).unwrap();
    s.post(spec, args)
}

#[test]
fn new_variables() {
    let mut s = Store::default();
    let x = s.new_var(Range::interval(0, 9), usize::MAX).unwrap();
    assert_eq!(s.dom(x).size(), 10);
    let y = s.new_var(Range::interval(5, 5), usize::MAX).unwrap();
    assert_eq!(s.dom(y).singleton(), Some(5));
    assert!(s.new_var(Range::interval(3, 2), usize::MAX).is_none());
}

#[test]
fn tell_cases() {
    let mut s = Store::default();
    let x = s.new_var(Range::interval(0, 9), usize::MAX).unwrap();
    s.undo.clear();
    s.serial = 1;
    let waves = s.stats.waves;
    assert!(s.tell(x, &Range::interval(0, 9)));
    assert!(s.undo.is_empty());
    assert!(s.propagate());
    assert_eq!(s.stats.waves, waves);
    assert!(s.tell(x, &Range::interval(3, 5)));
    assert_eq!(s.dom(x), &Range::interval(3, 5));
    assert_eq!(s.undo.len(), 1);
    assert!(s.propagate());
    assert_eq!(s.stats.waves, waves + 1);
    assert!(!s.tell(x, &Range::interval(6, 8)));
}

#[test]
fn chain_of_inequalities() {
    let mut s = Store::default();
    let v: Vec<u32> = (0..3).map(|_| s.new_var(Range::interval(0, 9), usize::MAX).unwrap()).collect();
    assert!(post(&mut s, "x_lte_y", vec![ArgVal::Var(v[0]), ArgVal::Var(v[1])]));
    assert!(post(&mut s, "x_lte_y", vec![ArgVal::Var(v[1]), ArgVal::Var(v[2])]));
    assert!(s.tell(v[2], &Range::interval(0, 5)) && s.propagate());
    for &x in &v {
        assert_eq!(s.dom(x).max(), Some(5));
    }
    assert!(s.at_fixpoint());
}

#[test]
fn unbounded_upper_side() {
    let mut s = Store::default();
    let x = s.new_var(Range::interval(4, 9), usize::MAX).unwrap();
    let y = s.new_var(Range::full(), usize::MAX).unwrap();
    assert!(post(&mut s, "x_lte_y", vec![ArgVal::Var(x), ArgVal::Var(y)]));
    assert_eq!(s.dom(y), &Range::interval(4, MAX_INTEGER));
}

#[test]
fn backtracking_restores_domains_and_frames() {
    let mut m = machine();
    assert_eq!(
        sols(&mut m, "fd_domain(X, 0, 9), X #\\= 5, ( X = 3, fail ; fd_dom(X, D) )"),
        ["X=_#0(0..4:6..9),D=[0,1,2,3,4,6,7,8,9]"]
    );
    let rt = parse_term("fd_domain([X,Y], 0, 9), ( X #=< Y, Y #< 4, fail ; true )", &OpTable::default()).unwrap();
    let before = m.fd.frames.len();
    let mut q = m.start_query(&rt);
    assert!(m.next(&mut q).unwrap());
    assert_eq!(m.fd.frames.len(), before);
    m.close(q);
}

#[test]
fn labeling_bound_list_leaves_no_choice_point() {
    let mut m = machine();
    let rt = parse_term("fd_labeling([1, 2, 3])", &OpTable::default()).unwrap();
    let mut q = m.start_query(&rt);
    assert!(m.next(&mut q).unwrap());
    assert!(!m.has_alternatives(&q));
    m.close(q);
}

#[test]
fn disequality_forward_checks() {
    let mut m = machine();
    assert_eq!(sols(&mut m, "fd_domain(Y, 1, 5), X = 3, X #\\= Y, fd_dom(Y, D)"), ["Y=_#0(1..2:4..5),X=3,D=[1,2,4,5]"]);
    assert_eq!(sols(&mut m, "fd_domain([X,Y], 1, 5), X #\\= Y, X #= 3, fd_dom(Y, D)"), ["X=3,Y=_#26(1..2:4..5),D=[1,2,4,5]"]);
}

#[test]
fn four_queens_solutions() {
    let mut m = machine();
    m.consult_text(common::fdcheck::FD_BENCH, "b").unwrap();
    assert_eq!(sols(&mut m, "queens(4, Q)"), ["Q=[2,4,1,3]", "Q=[3,1,4,2]"]);
}

#[test]
fn element_and_reified() {
    let mut m = machine();
    assert_eq!(sols(&mut m, "fd_domain(V, 0, 9), element(I, [3,5,3], V), fd_dom(V, D)"), ["V=_#0(3:5),I=_#5(1..3),D=[3,5]"]);
    assert_eq!(sols(&mut m, "fd_domain(I, 1, 3), element(I, [3,5,3], 5)"), ["I=2"]);
    assert_eq!(sols(&mut m, "fd_domain(X, 1, 3), fd_domain(B, 0, 1), fd_reified_eq(X, 5, B)"), ["X=_#44(1..3),B=0"]);
}
