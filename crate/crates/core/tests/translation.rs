mod common;

use common::golden::{wam, BOOL_WAM, CONC_PL};
use gpl_core::ma::{emit_ma, parse_ma, CodeKind, MaInstr, MaObject, Vis};
use gpl_core::pl2wam::{parse_wam, WamFile};
use gpl_core::wam2ma::{decode_symbol, encode_symbol, translate};
use proptest::prelude::*;

fn hex_oracle(name: &str, arity: usize) -> String {
    let hex: String = name.bytes().map(|b| format!("{b:02X}")).collect();
    format!("X{hex}_{arity}")
}

fn count(obj: &MaObject, f: &str) -> usize {
    obj.call_c_names().iter().filter(|n| **n == f).count()
}

#[test]
fn symbol_encoding() {
    assert_eq!(encode_symbol("is_true", 1), "X69735F74727565_1");
    assert_eq!(encode_symbol("conc", 3), hex_oracle("conc", 3));
    assert_eq!(decode_symbol("X636F6E63_3"), Some(("conc".to_string(), 3)));
    assert_eq!(decode_symbol("X6_1"), None);
    assert_eq!(decode_symbol("main"), None);
}

proptest! {
    #[test]
    fn symbols_round_trip(name in "\\PC{0,12}", arity in 0usize..300) {
        let s = encode_symbol(&name, arity);
        prop_assert_eq!(&s, &hex_oracle(&name, arity));
        prop_assert!(s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_'));
        prop_assert_eq!(decode_symbol(&s), Some((name, arity)));
    }
}

#[test]
fn empty_file_gives_trivial_entry_points() {
    let obj = translate(&WamFile::default());
    let c: Vec<_> = obj.code().filter(|b| b.kind == CodeKind::C).collect();
    assert!(obj.code().all(|b| b.kind == CodeKind::C));
    assert_eq!(obj.code().filter(|b| b.vis == Vis::Initializer).count(), 1);
    for b in &c {
        assert_eq!(b.body.last(), Some(&MaInstr::CRet), "{}", b.name);
    }
    assert_eq!(count(&obj, "Pl_Create_Pred"), 0);
    assert_eq!(count(&obj, "Pl_New_Object"), 1);
}

#[test]
fn conc_uses_only_its_runtime_calls() {
    let obj = translate(&parse_wam(&wam(CONC_PL, "/tmp/myprog.pl")).unwrap());
    let code: Vec<&str> = obj
        .code()
        .filter(|b| b.kind == CodeKind::Pl)
        .flat_map(|b| b.body.iter())
        .filter_map(|i| match i {
            MaInstr::CallC(f, _) => Some(f.as_str()),
            _ => None,
        })
        .collect();
    assert!(!code.is_empty());
    for f in code {
        let ok = f.starts_with("Pl_Switch_On_Term")
            || f.starts_with("Pl_Create_Choice_Point")
            || f.starts_with("Pl_Update_Choice_Point")
            || f.starts_with("Pl_Delete_Choice_Point")
            || f.starts_with("Pl_Unify_")
            || matches!(f, "Pl_Get_Nil" | "Pl_Get_Value" | "Pl_Get_List");
        assert!(ok, "unexpected runtime call {f}");
    }
    assert_eq!(count(&obj, "Pl_Create_Atom"), 2);
    assert_eq!(count(&obj, "Pl_Create_Pred"), 1);
    assert_eq!(count(&obj, "Pl_Create_Swt_Table"), 0);
}

#[test]
fn bool_instruction_mapping() {
    let obj = translate(&parse_wam(BOOL_WAM).unwrap());
    let body = &obj.block("X69735F74727565_1").unwrap().body;
    let text: Vec<String> = body.iter().map(|i| i.to_string().trim().to_string()).collect();
    let at = |s: &str| text.iter().position(|t| t == s).unwrap_or_else(|| panic!("{s} not in {text:#?}"));
    let get = at("call_c   Pl_Get_Atom_Tagged(ta(0),X(0))");
    assert_eq!(text[get + 1], "fail_ret");
    assert!(text.contains(&"move     Y(0),X(0)".to_string()));
    assert!(text.contains(&"pl_jump  X69735F74727565_1".to_string()));
    assert_eq!(count(&obj, "Pl_Create_Atom"), 4);
    assert_eq!(count(&obj, "Pl_Create_Atom_Tagged"), 1);
    assert_eq!(count(&obj, "Pl_Create_Functor_Arity_Tagged"), 2);
    assert_eq!(count(&obj, "Pl_Create_Swt_Table"), 1);
    assert_eq!(count(&obj, "Pl_Create_Swt_Stc_Element"), 2);
    assert_eq!(count(&obj, "Pl_Create_Pred"), 1);
}

#[test]
fn bool_ma_shape() {
    let obj = translate(&parse_wam(BOOL_WAM).unwrap());
    let back = parse_ma(&emit_ma(&obj)).unwrap();
    assert_eq!(back, obj);
    assert_eq!(obj.code().filter(|b| b.kind == CodeKind::Pl).count(), 1);
    assert_eq!(obj.longs().count(), 4);
    assert_eq!(obj.code().filter(|b| b.kind == CodeKind::C).count(), 4);
}

#[test]
fn ma_parser_limits() {
    let min = parse_ma("pl_code global X61_0\n pl_ret\n").unwrap();
    assert_eq!(min.code().count(), 1);
    let two = "c_code initializer a\n c_ret\nc_code initializer b\n c_ret\n";
    assert!(parse_ma(two).is_err());
}
