//! The textual `.wam` format: `file_name/1`, `predicate/6`, `directive/3`
//! and `ensure_linked/1` facts.

use std::fmt::Write as _;

use thiserror::Error;

use super::instr::{Instr, PredInd};
use crate::reader::{fmt_atom, read_all, write_term, OpTable};
use crate::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    User,
    BuiltIn,
    BuiltInFd,
}

impl Origin {
    pub fn name(self) -> &'static str {
        match self {
            Origin::User => "user",
            Origin::BuiltIn => "built_in",
            Origin::BuiltInFd => "built_in_fd",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WamPredicate {
    pub pred: PredInd,
    pub line: usize,
    pub dynamic: bool,
    pub public: bool,
    pub origin: Origin,
    pub code: Vec<Instr>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirectiveKind {
    System,
    User,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WamDirective {
    pub line: usize,
    pub kind: DirectiveKind,
    pub code: Vec<Instr>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum WamItem {
    Predicate(WamPredicate),
    Directive(WamDirective),
    EnsureLinked(Vec<PredInd>),
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct WamFile {
    pub file_name: String,
    pub items: Vec<WamItem>,
}

impl WamFile {
    pub fn predicates(&self) -> impl Iterator<Item = &WamPredicate> {
        self.items.iter().filter_map(|i| match i {
            WamItem::Predicate(p) => Some(p),
            _ => None,
        })
    }

    pub fn directives(&self) -> impl Iterator<Item = &WamDirective> {
        self.items.iter().filter_map(|i| match i {
            WamItem::Directive(d) => Some(d),
            _ => None,
        })
    }

    pub fn predicate(&self, name: &str, arity: usize) -> Option<&WamPredicate> {
        self.predicates().find(|p| p.pred.name == name && p.pred.arity == arity)
    }
}

fn write_code(out: &mut String, code: &[Instr]) {
    out.push('[');
    let ops = OpTable::default();
    for (k, ins) in code.iter().enumerate() {
        out.push('\n');
        if !matches!(ins, Instr::Label(_)) {
            out.push_str("    ");
        }
        out.push_str(&write_term(&ins.to_term(), &ops, true));
        if k + 1 < code.len() {
            out.push(',');
        }
    }
    out.push(']');
}

pub fn emit_wam(file: &WamFile) -> String {
    let mut out = String::new();
    let ops = OpTable::default();
    let _ = writeln!(out, "file_name({}).", fmt_atom(&file.file_name, true));
    for item in &file.items {
        out.push('\n');
        match item {
            WamItem::Predicate(p) => {
                let _ = write!(
                    out,
                    "predicate({},{},{},{},{},",
                    write_term(&p.pred.to_term(), &ops, true),
                    p.line,
                    if p.dynamic { "dynamic" } else { "static" },
                    if p.public { "public" } else { "private" },
                    p.origin.name()
                );
                write_code(&mut out, &p.code);
                out.push_str(").\n");
            }
            WamItem::Directive(d) => {
                let kind = match d.kind {
                    DirectiveKind::System => "system",
                    DirectiveKind::User => "user",
                };
                let _ = write!(out, "directive({},{},", d.line, kind);
                write_code(&mut out, &d.code);
                out.push_str(").\n");
            }
            WamItem::EnsureLinked(ps) => {
                let list = Term::list(ps.iter().map(|p| p.to_term()).collect());
                let _ = writeln!(out, "ensure_linked({}).", write_term(&list, &ops, true));
            }
        }
    }
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum WamParseError {
    #[error("{0}")]
    Syntax(String),
    #[error("line {line}: malformed {what}")]
    Malformed { line: usize, what: String },
}

fn code_from(t: &Term, line: usize) -> Result<Vec<Instr>, WamParseError> {
    let items = t.list_items().ok_or_else(|| WamParseError::Malformed { line, what: "instruction list".into() })?;
    items
        .into_iter()
        .map(|i| Instr::from_term(i).ok_or_else(|| WamParseError::Malformed { line, what: format!("instruction {i}") }))
        .collect()
}

pub fn parse_wam(text: &str) -> Result<WamFile, WamParseError> {
    let mut file = WamFile::default();
    let ops = OpTable::default();
    for r in read_all(text, &ops) {
        let r = r.map_err(|e| WamParseError::Syntax(e.to_string()))?;
        let line = r.line;
        let bad = |what: &str| WamParseError::Malformed { line, what: what.to_string() };
        let t = &r.term;
        let a = t.args();
        match t.functor() {
            Some(("file_name", 1)) => file.file_name = a[0].as_atom().ok_or_else(|| bad("file_name"))?.to_string(),
            Some(("predicate", 6)) => {
                let pred = PredInd::from_term(&a[0]).ok_or_else(|| bad("predicate indicator"))?;
                let pline = a[1].as_int().ok_or_else(|| bad("predicate line"))? as usize;
                let dynamic = match a[2].as_atom() {
                    Some("static") => false,
                    Some("dynamic") => true,
                    _ => return Err(bad("determinacy")),
                };
                let public = match a[3].as_atom() {
                    Some("private") => false,
                    Some("public") => true,
                    _ => return Err(bad("visibility")),
                };
                let origin = match a[4].as_atom() {
                    Some("user") => Origin::User,
                    Some("built_in") => Origin::BuiltIn,
                    Some("built_in_fd") => Origin::BuiltInFd,
                    _ => return Err(bad("origin")),
                };
                let code = code_from(&a[5], line)?;
                file.items.push(WamItem::Predicate(WamPredicate { pred, line: pline, dynamic, public, origin, code }));
            }
            Some(("directive", 3)) => {
                let dline = a[0].as_int().ok_or_else(|| bad("directive line"))? as usize;
                let kind = match a[1].as_atom() {
                    Some("system") => DirectiveKind::System,
                    Some("user") => DirectiveKind::User,
                    _ => return Err(bad("directive kind")),
                };
                let code = code_from(&a[2], line)?;
                file.items.push(WamItem::Directive(WamDirective { line: dline, kind, code }));
            }
            Some(("ensure_linked", 1)) => {
                let ps = a[0]
                    .list_items()
                    .and_then(|l| l.into_iter().map(PredInd::from_term).collect::<Option<Vec<_>>>())
                    .ok_or_else(|| bad("ensure_linked"))?;
                file.items.push(WamItem::EnsureLinked(ps));
            }
            _ => return Err(bad("record")),
        }
    }
    Ok(file)
}
