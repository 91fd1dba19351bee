//! Reference listings and the golden-output checks.

use gpl_core::ma::emit_ma;
use gpl_core::pl2wam::{compile_source, emit_wam, parse_wam, CompileOpts};
use gpl_core::reader::OpTable;
use gpl_core::wam2ma::translate;

pub fn wam(src: &str, path: &str) -> String {
    let mut ops = OpTable::default();
    let out = compile_source(src, path, &mut ops, &CompileOpts::default());
    assert!(out.errors.is_empty(), "{:?}", out.errors);
    emit_wam(&out.file)
}

pub const CONC_PL: &str = "conc([], L, L).\nconc([X|L1], L2, [X|L3]) :-\n\tconc(L1, L2, L3).\n";

pub const CONC_WAM: &str = "file_name('/tmp/myprog.pl').

predicate(conc/3,1,static,private,user,[
    switch_on_term(1,2,fail,4,fail),
label(1),
    try_me_else(3),
label(2),
    get_nil(0),
    get_value(x(1),2),
    proceed,
label(3),
    trust_me_else_fail,
label(4),
    get_list(0),
    unify_variable(x(3)),
    unify_variable(x(0)),
    get_list(2),
    unify_value(x(3)),
    unify_variable(x(2)),
    execute(conc/3)]).
";

pub const BOOL_PL: &str = "is_true(true).

is_true(not(E)) :-
\tis_true(E), !,
\tfail.
is_true(not(_)).

is_true(and(E1, E2)) :-
\tis_true(E1),
\tis_true(E2).
";

pub const BOOL_WAM: &str = "file_name('/tmp/bool.pl').

predicate(is_true/1,1,static,private,user,[
    load_cut_level(1),
    switch_on_term(3,4,fail,fail,1),
label(1),
    switch_on_structure([(not/1,2),(and/2,10)]),
label(2),
    try(6),
    trust(8),
label(3),
    try_me_else(5),
label(4),
    get_atom(true,0),
    proceed,
label(5),
    retry_me_else(7),
label(6),
    allocate(1),
    get_structure(not/1,0),
    unify_variable(x(0)),
    get_variable(y(0),1),
    call(is_true/1),
    cut(y(0)),
    fail,
label(7),
    retry_me_else(9),
label(8),
    get_structure(not/1,0),
    unify_void(1),
    proceed,
label(9),
    trust_me_else_fail,
label(10),
    allocate(1),
    get_structure(and/2,0),
    unify_variable(x(0)),
    unify_variable(y(0)),
    call(is_true/1),
    put_value(y(0),0),
    deallocate,
    execute(is_true/1)]).
";

pub const P2_WAM: &str = "predicate(p/2,7,static,private,user,[
    allocate(1),
    get_atom(a,0),
    get_variable(y(0),1),
    put_atom(a,0),
    put_value(y(0),1),
    call(q/2),
    put_value(y(0),0),
    deallocate,
    execute(r/1)]).
";

/// Code block of the bool example in mini-assembly.
pub const BOOL_MA_CODE: &str = "pl_code global X69735F74727565_1
  call_c   Pl_Load_Cut_Level(&X(1))
  call_c   Pl_Switch_On_Term_Var_Atm_Stc(&Lpred1_3,&Lpred1_4,&Lpred1_1)
  jump_ret
Lpred1_1:
  call_c   Pl_Switch_On_Structure(st(0),2)
  jump_ret
Lpred1_2:
  call_c   Pl_Create_Choice_Point2(&Lpred1_sub_0)
  jump     Lpred1_6
Lpred1_sub_0:
  call_c   Pl_Delete_Choice_Point2()
  jump     Lpred1_8
Lpred1_3:
  call_c   Pl_Create_Choice_Point2(&Lpred1_5)
Lpred1_4:
  call_c   Pl_Get_Atom_Tagged(ta(0),X(0))
  fail_ret
  pl_ret
Lpred1_5:
  call_c   Pl_Update_Choice_Point2(&Lpred1_7)
Lpred1_6:
  call_c   Pl_Allocate(1)
  call_c   Pl_Get_Structure_Tagged(fn(0),X(0))
  fail_ret
  call_c   Pl_Unify_Variable()
  move_ret X(0)
  move     X(1),Y(0)
  pl_call  X69735F74727565_1
  call_c   Pl_Cut(Y(0))
  pl_fail
Lpred1_7:
  call_c   Pl_Update_Choice_Point2(&Lpred1_9)
Lpred1_8:
  call_c   Pl_Get_Structure_Tagged(fn(0),X(0))
  fail_ret
  call_c   Pl_Unify_Void(1)
  pl_ret
Lpred1_9:
  call_c   Pl_Delete_Choice_Point2()
Lpred1_10:
  call_c   Pl_Allocate(1)
  call_c   Pl_Get_Structure_Tagged(fn(1),X(0))
  fail_ret
  call_c   Pl_Unify_Variable()
  move_ret X(0)
  call_c   Pl_Unify_Variable()
  move_ret Y(0)
  pl_call  X69735F74727565_1
  move     Y(0),X(0)
  call_c   Pl_Deallocate()
  pl_jump  X69735F74727565_1
";

/// Initializer calls of the bool example, each with the slot its result
/// is moved to.
pub const BOOL_MA_INIT: &[&str] = &[
    "Pl_Create_Atom(\"/tmp/bool.pl\") -> at(0)",
    "Pl_Create_Atom(\"and\") -> at(3)",
    "Pl_Create_Atom(\"is_true\") -> at(1)",
    "Pl_Create_Atom(\"not\") -> at(2)",
    "Pl_Create_Atom_Tagged(\"true\") -> ta(0)",
    "Pl_Create_Functor_Arity_Tagged(\"and\",2) -> fn(1)",
    "Pl_Create_Functor_Arity_Tagged(\"not\",1) -> fn(0)",
    "Pl_Create_Pred(at(1),1,at(0),1,1,&X69735F74727565_1)",
    "Pl_Create_Swt_Table(2) -> st(0)",
    "Pl_Create_Swt_Stc_Element(st(0),2,at(2),1,&Lpred1_2)",
    "Pl_Create_Swt_Stc_Element(st(0),2,at(3),2,&Lpred1_10)",
];

fn diff(got: &str, want: &str) -> Result<(), String> {
    if got == want {
        return Ok(());
    }
    let line = got.lines().zip(want.lines()).position(|(a, b)| a != b).unwrap_or(got.lines().count().min(want.lines().count()));
    Err(format!("first difference at line {}: got {:?}, want {:?}", line + 1, got.lines().nth(line), want.lines().nth(line)))
}

pub fn criterion_1() -> Result<(), String> {
    diff(&wam(CONC_PL, "/tmp/myprog.pl"), CONC_WAM)
}

pub fn criterion_2() -> Result<(), String> {
    diff(&wam(BOOL_PL, "/tmp/bool.pl"), BOOL_WAM)
}

pub fn criterion_3() -> Result<(), String> {
    let text = wam("\n\n\n\n\n\np(a, X) :- q(a, X), r(X).\n", "p.pl");
    let body = text.split_once("\n\n").map(|(_, b)| b).unwrap_or("");
    diff(body, P2_WAM)
}

/// Pair each initializer `call_c` with the `move_ret` following it.
fn init_calls(block: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for l in block.lines().map(str::trim) {
        if let Some(c) = l.strip_prefix("call_c") {
            out.push(c.trim().to_string());
        } else if let Some(d) = l.strip_prefix("move_ret") {
            if let Some(last) = out.last_mut() {
                last.push_str(" -> ");
                last.push_str(d.trim());
            }
        }
    }
    out
}

pub fn criterion_4() -> Result<(), String> {
    let out = compile_source(BOOL_PL, "/tmp/bool.pl", &mut OpTable::default(), &CompileOpts::default());
    let file = parse_wam(&emit_wam(&out.file)).map_err(|e| e.to_string())?;
    let text = emit_ma(&translate(&file));
    let code_end = text.find("\nlong local").ok_or("no data declarations")?;
    diff(&format!("{}\n", text[..code_end].trim_end()), BOOL_MA_CODE)?;
    for decl in ["long local at(4)", "long local ta(1)", "long local fn(2)", "long local st(1)"] {
        if !text.lines().any(|l| l.trim() == decl) {
            return Err(format!("missing `{decl}`"));
        }
    }
    let init_at = text.find("c_code  local Prolog_Object_Initializer").ok_or("no Prolog initializer")?;
    let init_end = text[init_at..].find("c_ret").ok_or("unterminated initializer")? + init_at;
    let calls = init_calls(&text[init_at..init_end]);
    let mut got = calls.clone();
    let mut want: Vec<String> = BOOL_MA_INIT.iter().map(|s| s.to_string()).collect();
    got.sort();
    want.sort();
    if got != want {
        return Err(format!("initializer calls differ: {calls:?}"));
    }
    // Creation order: atoms and functors, then the predicate, then its tables.
    let pos = |p: &str| calls.iter().rposition(|c| c.starts_with(p)).unwrap();
    let first = |p: &str| calls.iter().position(|c| c.starts_with(p)).unwrap();
    if !(pos("Pl_Create_Functor") < first("Pl_Create_Pred") && pos("Pl_Create_Pred") < first("Pl_Create_Swt_Table")) {
        return Err(format!("initializer order: {calls:?}"));
    }
    if !text.contains("call_c   Pl_New_Object(&Prolog_Object_Initializer,&System_Directives,&User_Directives)") {
        return Err("Object_Initializer does not register the object".into());
    }
    Ok(())
}
