mod common;

use common::golden::*;
use gpl_core::pl2wam::{compile_source, emit_wam, parse_wam, CompileOpts};
use gpl_core::reader::OpTable;

#[test]
fn conc_matches_reference_listing() {
    criterion_1().unwrap();
}

#[test]
fn is_true_matches_reference_listing() {
    criterion_2().unwrap();
}

#[test]
fn p2_keeps_redundant_moves() {
    criterion_3().unwrap();
}

#[test]
fn bool_translates_to_reference_ma() {
    criterion_4().unwrap();
}

#[test]
fn emitted_text_parses_back() {
    for (src, path) in [(CONC_PL, "a.pl"), (BOOL_PL, "b.pl")] {
        let mut ops = OpTable::default();
        let out = compile_source(src, path, &mut ops, &CompileOpts::default());
        let back = parse_wam(&emit_wam(&out.file)).unwrap();
        assert_eq!(back, out.file);
    }
}

#[test]
fn unoptimized_conc_still_compiles() {
    let mut ops = OpTable::default();
    let out = compile_source(CONC_PL, "a.pl", &mut ops, &CompileOpts::unoptimized());
    assert!(out.errors.is_empty());
    assert!(emit_wam(&out.file).contains("call(conc/3)"));
}

fn compile(src: &str) -> gpl_core::pl2wam::WamFile {
    let out = compile_source(src, "t.pl", &mut OpTable::default(), &CompileOpts::default());
    assert!(out.errors.is_empty(), "{:?}", out.errors);
    out.file
}

#[test]
fn initialization_only_file() {
    use gpl_core::pl2wam::{DirectiveKind, WamItem};
    let f = compile(":- initialization(main).\n");
    let preds = f.items.iter().filter(|i| matches!(i, WamItem::Predicate(_))).count();
    let user: Vec<_> = f.items.iter().filter(|i| matches!(i, WamItem::Directive(d) if d.kind == DirectiveKind::User)).collect();
    assert_eq!(preds, 0);
    assert_eq!(user.len(), 1);
}

#[test]
fn single_clause_has_no_choice_or_switch() {
    let text = emit_wam(&compile("p(X, f(X)) :- q(X).\n"));
    for op in ["switch_on", "try", "retry", "trust"] {
        assert!(!text.contains(op), "{text}");
    }
}

#[test]
fn repeated_head_variable_uses_get_value() {
    let text = emit_wam(&compile("q(Z, Z).\n"));
    assert_eq!(text.matches("get_variable").count() + text.matches("get_value").count(), 1, "{text}");
    assert!(text.contains("get_value(x(0),1)") || text.contains("get_value(x(1),0)"), "{text}");
}

#[test]
fn empty_file_is_just_its_name() {
    let text = emit_wam(&compile(""));
    assert_eq!(text.trim(), "file_name('t.pl').");
}
