//! WAM to mini-assembly translation.

use std::collections::HashMap;

use crate::ma::{Arg, CodeBlock, CodeKind, Loc, LongDecl, MaInstr, MaItem, MaObject, Vis};
use crate::pl2wam::{DirectiveKind, Instr, Origin, PredInd, Reg, Target, WamFile, WamItem, WamPredicate};

/// Predicate property bits passed to `Pl_Create_Pred`.
pub mod mask {
    pub const NATIVE: i64 = 1;
    pub const DYNAMIC: i64 = 2;
    pub const PUBLIC: i64 = 4;
    pub const BUILT_IN: i64 = 8;
    pub const BUILT_IN_FD: i64 = 16;
}

/// Name of the runtime entry that runs the clauses of a dynamic predicate.
pub const CALL_DYNAMIC: (&str, usize) = ("$call_dynamic", 1);

pub fn encode_symbol(name: &str, arity: usize) -> String {
    let mut s = String::with_capacity(2 + 2 * name.len() + 4);
    s.push('X');
    for b in name.bytes() {
        s.push_str(&format!("{b:02X}"));
    }
    s.push('_');
    s.push_str(&arity.to_string());
    s
}

pub fn decode_symbol(sym: &str) -> Option<(String, usize)> {
    let body = sym.strip_prefix('X')?;
    let (hex, arity) = body.rsplit_once('_')?;
    if hex.len() % 2 != 0 || !hex.bytes().all(|b| b.is_ascii_digit() || (b'A'..=b'F').contains(&b)) {
        return None;
    }
    let bytes: Option<Vec<u8>> = (0..hex.len()).step_by(2).map(|i| u8::from_str_radix(&hex[i..i + 2], 16).ok()).collect();
    let name = String::from_utf8(bytes?).ok()?;
    let arity = arity.parse().ok()?;
    (encode_symbol(&name, arity) == sym).then_some((name, arity))
}

/// `name/arity` for a predicate symbol, or the symbol itself.
pub fn describe_symbol(sym: &str) -> String {
    match decode_symbol(sym) {
        Some((n, a)) => format!("{}/{a}", crate::reader::fmt_atom(&n, true)),
        None => sym.to_string(),
    }
}

pub fn pred_symbol(p: &PredInd) -> String {
    encode_symbol(&p.name, p.arity)
}

#[derive(Default)]
struct Table<K: std::hash::Hash + Eq + Clone> {
    items: Vec<K>,
    index: HashMap<K, usize>,
}

impl<K: std::hash::Hash + Eq + Clone> Table<K> {
    fn get(&mut self, k: &K) -> usize {
        if let Some(&i) = self.index.get(k) {
            return i;
        }
        let i = self.items.len();
        self.items.push(k.clone());
        self.index.insert(k.clone(), i);
        i
    }
}

#[derive(Default)]
struct Ctx {
    atoms: Table<String>,
    tagged: Table<String>,
    functors: Table<(String, usize)>,
    tables: usize,
    /// Predicate registrations and switch tables, in streaming order.
    init: Vec<MaInstr>,
    sys: Vec<MaInstr>,
    user: Vec<MaInstr>,
    items: Vec<MaItem>,
}

fn mem(name: &str, i: usize) -> Arg {
    Arg::Mem(name.to_string(), Some(i))
}

fn reg(r: Reg) -> Arg {
    match r {
        Reg::X(i) => Arg::X(i),
        Reg::Y(i) => Arg::Y(i),
    }
}

fn loc(r: Reg) -> Loc {
    match r {
        Reg::X(i) => Loc::X(i),
        Reg::Y(i) => Loc::Y(i),
    }
}

fn call(name: &str, args: Vec<Arg>) -> MaInstr {
    MaInstr::CallC(name.to_string(), args)
}

fn cp_name(base: &str, k: usize) -> (String, bool) {
    if (1..4).contains(&k) {
        (format!("{base}{k}"), false)
    } else {
        (base.to_string(), true)
    }
}

struct PredCtx<'a> {
    prefix: String,
    cp_k: usize,
    sub: usize,
    ctx: &'a mut Ctx,
}

impl PredCtx<'_> {
    fn label(&self, n: usize) -> String {
        format!("{}_{n}", self.prefix)
    }

    fn target(&self, t: &Target) -> Option<String> {
        match t {
            Target::Label(n) => Some(self.label(*n)),
            Target::Fail => None,
        }
    }

    fn sub_label(&mut self) -> String {
        let l = format!("{}_sub_{}", self.prefix, self.sub);
        self.sub += 1;
        l
    }

    fn choice(&self, base: &str, alt: Option<String>) -> MaInstr {
        let (name, generic) = cp_name(base, self.cp_k);
        let mut args = Vec::new();
        if let Some(a) = alt {
            args.push(Arg::Addr(a));
        }
        if generic {
            args.push(Arg::Int(self.cp_k as i64));
        }
        call(&name, args)
    }

    fn switch_table(&mut self, kind: &str, entries: Vec<(Vec<Arg>, usize)>) -> Vec<MaInstr> {
        let st = self.ctx.tables;
        self.ctx.tables += 1;
        let size = entries.len() as i64;
        self.ctx.init.push(call("Pl_Create_Swt_Table", vec![Arg::Int(size)]));
        self.ctx.init.push(MaInstr::MoveRet(Loc::Mem("st".into(), Some(st))));
        for (key, l) in entries {
            let mut args = vec![mem("st", st), Arg::Int(size)];
            args.extend(key);
            args.push(Arg::Addr(self.label(l)));
            self.ctx.init.push(call(&format!("Pl_Create_Swt_{kind}_Element"), args));
        }
        vec![call(&format!("Pl_Switch_On_{}", switch_kind_name(kind)), vec![mem("st", st), Arg::Int(size)]), MaInstr::JumpRet]
    }

    fn instr(&mut self, i: &Instr, out: &mut Vec<MaInstr>) {
        let ctx = &mut *self.ctx;
        match i {
            Instr::Label(n) => out.push(MaInstr::Label(self.label(*n))),
            Instr::GetVariable(r, a) => {
                if *r != Reg::X(*a) {
                    out.push(MaInstr::Move(Loc::X(*a), loc(*r)));
                }
            }
            Instr::GetValue(r, a) => {
                out.push(call("Pl_Get_Value", vec![reg(*r), Arg::X(*a)]));
                out.push(MaInstr::FailRet);
            }
            Instr::GetAtom(at, a) => {
                let k = ctx.tagged.get(at);
                out.push(call("Pl_Get_Atom_Tagged", vec![mem("ta", k), Arg::X(*a)]));
                out.push(MaInstr::FailRet);
            }
            Instr::GetInteger(n, a) => {
                out.push(call("Pl_Get_Integer", vec![Arg::Int(*n), Arg::X(*a)]));
                out.push(MaInstr::FailRet);
            }
            Instr::GetFloat(x, a) => {
                out.push(call("Pl_Get_Float", vec![Arg::Float(*x), Arg::X(*a)]));
                out.push(MaInstr::FailRet);
            }
            Instr::GetNil(a) => {
                out.push(call("Pl_Get_Nil", vec![Arg::X(*a)]));
                out.push(MaInstr::FailRet);
            }
            Instr::GetList(a) => {
                out.push(call("Pl_Get_List", vec![Arg::X(*a)]));
                out.push(MaInstr::FailRet);
            }
            Instr::GetStructure(p, a) => {
                let k = ctx.functors.get(&(p.name.clone(), p.arity));
                out.push(call("Pl_Get_Structure_Tagged", vec![mem("fn", k), Arg::X(*a)]));
                out.push(MaInstr::FailRet);
            }
            Instr::PutVariable(r, a) => {
                out.push(call("Pl_Put_Variable", vec![]));
                out.push(MaInstr::MoveRet(loc(*r)));
                if *r != Reg::X(*a) {
                    out.push(MaInstr::Move(loc(*r), Loc::X(*a)));
                }
            }
            Instr::PutValue(r, a) => {
                if *r != Reg::X(*a) {
                    out.push(MaInstr::Move(loc(*r), Loc::X(*a)));
                }
            }
            Instr::PutAtom(at, a) => {
                let k = ctx.tagged.get(at);
                out.push(call("Pl_Put_Atom_Tagged", vec![mem("ta", k)]));
                out.push(MaInstr::MoveRet(Loc::X(*a)));
            }
            Instr::PutInteger(n, a) => {
                out.push(call("Pl_Put_Integer", vec![Arg::Int(*n)]));
                out.push(MaInstr::MoveRet(Loc::X(*a)));
            }
            Instr::PutFloat(x, a) => {
                out.push(call("Pl_Put_Float", vec![Arg::Float(*x)]));
                out.push(MaInstr::MoveRet(Loc::X(*a)));
            }
            Instr::PutNil(a) => {
                out.push(call("Pl_Put_Nil", vec![]));
                out.push(MaInstr::MoveRet(Loc::X(*a)));
            }
            Instr::PutList(a) => {
                out.push(call("Pl_Put_List", vec![]));
                out.push(MaInstr::MoveRet(Loc::X(*a)));
            }
            Instr::PutStructure(p, a) => {
                let k = ctx.functors.get(&(p.name.clone(), p.arity));
                out.push(call("Pl_Put_Structure_Tagged", vec![mem("fn", k)]));
                out.push(MaInstr::MoveRet(Loc::X(*a)));
            }
            Instr::UnifyVariable(r) => {
                out.push(call("Pl_Unify_Variable", vec![]));
                out.push(MaInstr::MoveRet(loc(*r)));
            }
            Instr::UnifyValue(r) => {
                out.push(call("Pl_Unify_Value", vec![reg(*r)]));
                out.push(MaInstr::FailRet);
            }
            Instr::UnifyAtom(at) => {
                let k = ctx.tagged.get(at);
                out.push(call("Pl_Unify_Atom_Tagged", vec![mem("ta", k)]));
                out.push(MaInstr::FailRet);
            }
            Instr::UnifyInteger(n) => {
                out.push(call("Pl_Unify_Integer", vec![Arg::Int(*n)]));
                out.push(MaInstr::FailRet);
            }
            Instr::UnifyFloat(x) => {
                out.push(call("Pl_Unify_Float", vec![Arg::Float(*x)]));
                out.push(MaInstr::FailRet);
            }
            Instr::UnifyNil => {
                out.push(call("Pl_Unify_Nil", vec![]));
                out.push(MaInstr::FailRet);
            }
            Instr::UnifyVoid(n) => out.push(call("Pl_Unify_Void", vec![Arg::Int(*n as i64)])),
            Instr::Allocate(n) => out.push(call("Pl_Allocate", vec![Arg::Int(*n as i64)])),
            Instr::Deallocate => out.push(call("Pl_Deallocate", vec![])),
            Instr::Call(p) => out.push(MaInstr::PlCall(pred_symbol(p))),
            Instr::Execute(p) => out.push(MaInstr::PlJump(pred_symbol(p))),
            Instr::Proceed => out.push(MaInstr::PlRet),
            Instr::Fail => out.push(MaInstr::PlFail),
            Instr::SwitchOnTerm(ts) => {
                let mut name = String::from("Pl_Switch_On_Term");
                let mut args = Vec::new();
                for (t, tag) in ts.iter().zip(["Var", "Atm", "Int", "Lst", "Stc"]) {
                    if let Some(l) = self.target(t) {
                        name.push('_');
                        name.push_str(tag);
                        args.push(Arg::Addr(l));
                    }
                }
                out.push(call(&name, args));
                out.push(MaInstr::JumpRet);
            }
            Instr::SwitchOnAtom(tbl) => {
                let entries = tbl.iter().map(|(a, l)| (vec![mem("at", self.ctx.atoms.get(a))], *l)).collect();
                out.extend(self.switch_table("Atm", entries));
            }
            Instr::SwitchOnInteger(tbl) => {
                let entries = tbl.iter().map(|(n, l)| (vec![Arg::Int(*n)], *l)).collect();
                out.extend(self.switch_table("Int", entries));
            }
            Instr::SwitchOnStructure(tbl) => {
                let entries = tbl
                    .iter()
                    .map(|(p, l)| (vec![mem("at", self.ctx.atoms.get(&p.name)), Arg::Int(p.arity as i64)], *l))
                    .collect();
                out.extend(self.switch_table("Stc", entries));
            }
            Instr::TryMeElse(l) => out.push(self.choice("Pl_Create_Choice_Point", Some(self.label(*l)))),
            Instr::RetryMeElse(l) => out.push(self.choice("Pl_Update_Choice_Point", Some(self.label(*l)))),
            Instr::TrustMeElseFail => out.push(self.choice("Pl_Delete_Choice_Point", None)),
            Instr::Try(l) => {
                let sub = self.sub_label();
                out.push(self.choice("Pl_Create_Choice_Point", Some(sub.clone())));
                out.push(MaInstr::Jump(self.label(*l)));
                out.push(MaInstr::Label(sub));
            }
            Instr::Retry(l) => {
                let sub = self.sub_label();
                out.push(self.choice("Pl_Update_Choice_Point", Some(sub.clone())));
                out.push(MaInstr::Jump(self.label(*l)));
                out.push(MaInstr::Label(sub));
            }
            Instr::Trust(l) => {
                out.push(self.choice("Pl_Delete_Choice_Point", None));
                out.push(MaInstr::Jump(self.label(*l)));
            }
            Instr::LoadCutLevel(a) => out.push(call("Pl_Load_Cut_Level", vec![Arg::XAddr(*a)])),
            Instr::Cut(r) => out.push(call("Pl_Cut", vec![reg(*r)])),
            Instr::CallC(name, regs) => {
                out.push(call(name, regs.iter().map(|r| reg(*r)).collect()));
                out.push(MaInstr::FailRet);
            }
        }
    }
}

fn switch_kind_name(kind: &str) -> &'static str {
    match kind {
        "Atm" => "Atom",
        "Int" => "Integer",
        _ => "Structure",
    }
}

fn translate_code(prefix: String, cp_k: usize, code: &[Instr], ctx: &mut Ctx) -> Vec<MaInstr> {
    let mut pc = PredCtx { prefix, cp_k, sub: 0, ctx };
    let mut out = Vec::with_capacity(code.len() * 2);
    for i in code {
        pc.instr(i, &mut out);
    }
    out
}

fn pred_mask(p: &WamPredicate) -> i64 {
    let mut m = if p.dynamic { mask::DYNAMIC } else { mask::NATIVE };
    if p.public {
        m |= mask::PUBLIC;
    }
    match p.origin {
        Origin::User => {}
        Origin::BuiltIn => m |= mask::BUILT_IN,
        Origin::BuiltInFd => m |= mask::BUILT_IN_FD,
    }
    m
}

fn cut_arity(code: &[Instr], arity: usize) -> usize {
    if matches!(code.first(), Some(Instr::LoadCutLevel(_))) {
        arity + 1
    } else {
        arity
    }
}

pub fn translate(file: &WamFile) -> MaObject {
    let mut ctx = Ctx::default();
    let file_atom = ctx.atoms.get(&file.file_name);
    let mut npred = 0;
    let mut ndir = 0;
    for item in &file.items {
        match item {
            WamItem::Predicate(p) => {
                npred += 1;
                let sym = pred_symbol(&p.pred);
                let name_atom = ctx.atoms.get(&p.pred.name);
                ctx.init.push(call(
                    "Pl_Create_Pred",
                    vec![
                        mem("at", name_atom),
                        Arg::Int(p.pred.arity as i64),
                        mem("at", file_atom),
                        Arg::Int(p.line as i64),
                        Arg::Int(pred_mask(p)),
                        Arg::Addr(sym.clone()),
                    ],
                ));
                let body = if p.dynamic {
                    vec![
                        call("Pl_Dynamic_Goal", vec![mem("at", name_atom), Arg::Int(p.pred.arity as i64)]),
                        MaInstr::MoveRet(Loc::X(0)),
                        MaInstr::PlJump(encode_symbol(CALL_DYNAMIC.0, CALL_DYNAMIC.1)),
                    ]
                } else {
                    let k = cut_arity(&p.code, p.pred.arity);
                    translate_code(format!("Lpred{npred}"), k, &p.code, &mut ctx)
                };
                ctx.items.push(MaItem::Code(CodeBlock { kind: CodeKind::Pl, vis: Vis::Global, name: sym, body }));
            }
            WamItem::Directive(d) => {
                ndir += 1;
                let name = format!("Ldir{ndir}");
                let body = translate_code(name.clone(), cut_arity(&d.code, 0), &d.code, &mut ctx);
                let (list, flag) = match d.kind {
                    DirectiveKind::System => (&mut ctx.sys, 0),
                    DirectiveKind::User => (&mut ctx.user, 1),
                };
                list.push(call(
                    "Pl_Execute_Directive",
                    vec![mem("at", file_atom), Arg::Int(d.line as i64), Arg::Int(flag), Arg::Addr(name.clone())],
                ));
                ctx.items.push(MaItem::Code(CodeBlock { kind: CodeKind::Pl, vis: Vis::Local, name, body }));
            }
            WamItem::EnsureLinked(ps) => {
                ctx.init.push(call("Pl_Ensure_Linked", ps.iter().map(|p| Arg::Addr(pred_symbol(p))).collect()));
            }
        }
    }
    finish(ctx)
}

fn finish(mut ctx: Ctx) -> MaObject {
    let mut items = std::mem::take(&mut ctx.items);
    for (name, size) in
        [("at", ctx.atoms.items.len()), ("ta", ctx.tagged.items.len()), ("fn", ctx.functors.items.len()), ("st", ctx.tables)]
    {
        items.push(MaItem::Long(LongDecl { vis: Vis::Local, name: name.into(), size: Some(size), init: None }));
    }
    let c_block = |vis, name: &str, mut body: Vec<MaInstr>| {
        body.push(MaInstr::CRet);
        MaItem::Code(CodeBlock { kind: CodeKind::C, vis, name: name.into(), body })
    };
    items.push(c_block(
        Vis::Initializer,
        "Object_Initializer",
        vec![call(
            "Pl_New_Object",
            vec![
                Arg::Addr("Prolog_Object_Initializer".into()),
                Arg::Addr("System_Directives".into()),
                Arg::Addr("User_Directives".into()),
            ],
        )],
    ));
    let mut init = Vec::new();
    for (k, a) in ctx.atoms.items.iter().enumerate() {
        init.push(call("Pl_Create_Atom", vec![Arg::Str(a.clone())]));
        init.push(MaInstr::MoveRet(Loc::Mem("at".into(), Some(k))));
    }
    for (k, a) in ctx.tagged.items.iter().enumerate() {
        init.push(call("Pl_Create_Atom_Tagged", vec![Arg::Str(a.clone())]));
        init.push(MaInstr::MoveRet(Loc::Mem("ta".into(), Some(k))));
    }
    for (k, (f, n)) in ctx.functors.items.iter().enumerate() {
        init.push(call("Pl_Create_Functor_Arity_Tagged", vec![Arg::Str(f.clone()), Arg::Int(*n as i64)]));
        init.push(MaInstr::MoveRet(Loc::Mem("fn".into(), Some(k))));
    }
    init.append(&mut ctx.init);
    items.push(c_block(Vis::Local, "Prolog_Object_Initializer", init));
    items.push(c_block(Vis::Local, "System_Directives", std::mem::take(&mut ctx.sys)));
    items.push(c_block(Vis::Local, "User_Directives", std::mem::take(&mut ctx.user)));
    MaObject { items }
}
