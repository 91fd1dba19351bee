mod common;

use std::path::PathBuf;

use common::linkcheck::Capture;
use common::{machine, sols};
use gpl_core::vm::Machine;

fn file(name: &str, text: &str) -> String {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn captured() -> (Machine, Capture) {
    let mut m = machine();
    let out = Capture::default();
    m.out = Box::new(out.clone());
    (m, out)
}

fn first(m: &mut Machine, g: &str) -> String {
    sols(m, g).into_iter().next().unwrap_or_else(|| "no".into())
}

#[test]
fn meta_call_errors() {
    let mut m = machine();
    m.consult_text("conc([],L,L).\nconc([X|L1],L2,[X|L3]) :- conc(L1,L2,L3).\n", "conc.pl").unwrap();
    assert_eq!(first(&mut m, "call(conc([1],[2],L))"), "L=[1,2]");
    assert_eq!(first(&mut m, "catch(call(_), error(E,_), true)"), "E=instantiation_error");
    assert_eq!(first(&mut m, "catch(call(undefined_pred), error(E,_), true)"), "E=existence_error(procedure,undefined_pred/0)");
    assert_eq!(
        first(&mut m, "catch(asserta(conc(a,b,c)), error(E,_), true)"),
        "E=permission_error(modify,static_procedure,conc/3)"
    );
}

#[test]
fn clause_and_retract() {
    let mut m = machine();
    assert_eq!(first(&mut m, "assertz(p(1)), assertz(p(2)), findall(p(X), clause(p(X), true), L)"), "L=[p(1),p(2)]");
    assert_eq!(first(&mut m, "retract(p(1)), clause(p(X), true)"), "X=2");
}

#[test]
fn consult_and_reconsult() {
    let (mut m, out) = captured();
    let path = file("foo_v1.pl", "foo :- write(one).\n:- initialization((write(loaded), nl)).\n");
    assert_eq!(sols(&mut m, &format!("consult('{path}'), foo")), [""]);
    assert_eq!(out.text(), "loaded\none");
    std::fs::write(&path, "foo :- write(two).\n").unwrap();
    assert_eq!(sols(&mut m, &format!("consult('{path}'), foo")), [""]);
    assert_eq!(out.text(), "loaded\nonetwo");
}

#[test]
fn syntax_error_leaves_image_unchanged() {
    let mut m = machine();
    let good = file("bar_good.pl", "bar(1).\n");
    let bad = file("bar_bad.pl", "bar(2).\nbar(3 :- .\n");
    assert_eq!(sols(&mut m, &format!("consult('{good}')")), [""]);
    assert!(sols(&mut m, &format!("consult('{bad}')")).is_empty());
    assert_eq!(sols(&mut m, "bar(X)"), ["X=1"]);
}

#[test]
fn consulted_operator_applies_to_queries() {
    let mut m = machine();
    let path = file("ops.pl", ":- op(700, xfx, ===>).\nrule(a ===> b).\n");
    assert_eq!(sols(&mut m, &format!("consult('{path}')")), [""]);
    assert_eq!(first(&mut m, "rule(X ===> Y)"), "X=a,Y=b");
}

#[test]
fn listing_output() {
    let (mut m, out) = captured();
    assert_eq!(sols(&mut m, "listing"), [""]);
    assert!(!out.text().contains(":-"), "{}", out.text());
    assert_eq!(sols(&mut m, "assertz(p(1)), listing(p/1)"), [""]);
    assert!(out.text().contains("p(1)."), "{}", out.text());
    let (mut m2, out2) = captured();
    m2.consult_text(":- dynamic(d/1).\nd(x).\nd(y).\ns(1).\n", "dyn.pl").unwrap();
    assert_eq!(sols(&mut m2, "listing"), [""]);
    let t = out2.text();
    assert!(t.contains("d(x).\nd(y).") && t.contains("s/1"), "{t}");
}
