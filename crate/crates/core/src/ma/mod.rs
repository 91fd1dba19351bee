//! Mini-assembly: the textual object format shared by the translator,
//! the linker and the virtual machine.

mod parse;

use std::fmt::{self, Write as _};

pub use parse::{parse_ma, MaParseError};

#[derive(Clone, Debug, PartialEq)]
pub enum Arg {
    Int(i64),
    Float(f64),
    Str(String),
    /// `&name`: address of a label, code symbol or datum.
    Addr(String),
    XAddr(usize),
    YAddr(usize),
    X(usize),
    Y(usize),
    /// Contents of `name` or `name(index)`.
    Mem(String, Option<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Loc {
    X(usize),
    Y(usize),
    Mem(String, Option<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum MaInstr {
    Label(String),
    PlJump(String),
    PlCall(String),
    PlRet,
    PlFail,
    Jump(String),
    CallC(String, Vec<Arg>),
    FailRet,
    JumpRet,
    MoveRet(Loc),
    CRet,
    Move(Loc, Loc),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Vis {
    Local,
    Global,
    Initializer,
}

impl Vis {
    pub fn name(self) -> &'static str {
        match self {
            Vis::Local => "local",
            Vis::Global => "global",
            Vis::Initializer => "initializer",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodeKind {
    Pl,
    C,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodeBlock {
    pub kind: CodeKind,
    pub vis: Vis,
    pub name: String,
    pub body: Vec<MaInstr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LongDecl {
    pub vis: Vis,
    pub name: String,
    pub size: Option<usize>,
    pub init: Option<i64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MaItem {
    Code(CodeBlock),
    Long(LongDecl),
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct MaObject {
    pub items: Vec<MaItem>,
}

impl MaObject {
    pub fn code(&self) -> impl Iterator<Item = &CodeBlock> {
        self.items.iter().filter_map(|i| match i {
            MaItem::Code(c) => Some(c),
            _ => None,
        })
    }

    pub fn longs(&self) -> impl Iterator<Item = &LongDecl> {
        self.items.iter().filter_map(|i| match i {
            MaItem::Long(l) => Some(l),
            _ => None,
        })
    }

    pub fn block(&self, name: &str) -> Option<&CodeBlock> {
        self.code().find(|c| c.name == name)
    }

    /// Names of all `call_c` functions, in order of appearance.
    pub fn call_c_names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for b in self.code() {
            for i in &b.body {
                if let MaInstr::CallC(f, _) = i {
                    out.push(f.as_str());
                }
            }
        }
        out
    }
}

fn mem(f: &mut fmt::Formatter<'_>, name: &str, idx: Option<usize>) -> fmt::Result {
    match idx {
        Some(i) => write!(f, "{name}({i})"),
        None => f.write_str(name),
    }
}

pub fn quote_c_string(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 || c as u32 == 0x7f => {
                let _ = write!(out, "\\x{:02x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn format_float(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'E', 'i', 'N']) {
        s
    } else {
        format!("{s}.0")
    }
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Int(n) => write!(f, "{n}"),
            Arg::Float(x) => f.write_str(&format_float(*x)),
            Arg::Str(s) => f.write_str(&quote_c_string(s)),
            Arg::Addr(s) => write!(f, "&{s}"),
            Arg::XAddr(i) => write!(f, "&X({i})"),
            Arg::YAddr(i) => write!(f, "&Y({i})"),
            Arg::X(i) => write!(f, "X({i})"),
            Arg::Y(i) => write!(f, "Y({i})"),
            Arg::Mem(n, i) => mem(f, n, *i),
        }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Loc::X(i) => write!(f, "X({i})"),
            Loc::Y(i) => write!(f, "Y({i})"),
            Loc::Mem(n, i) => mem(f, n, *i),
        }
    }
}

impl fmt::Display for MaInstr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = |f: &mut fmt::Formatter<'_>, m: &str, rest: &dyn fmt::Display| write!(f, "  {m:<8} {rest}");
        match self {
            MaInstr::Label(l) => write!(f, "{l}:"),
            MaInstr::PlJump(s) => op(f, "pl_jump", s),
            MaInstr::PlCall(s) => op(f, "pl_call", s),
            MaInstr::PlRet => f.write_str("  pl_ret"),
            MaInstr::PlFail => f.write_str("  pl_fail"),
            MaInstr::Jump(l) => op(f, "jump", l),
            MaInstr::CallC(name, args) => {
                let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                op(f, "call_c", &format!("{name}({})", args.join(",")))
            }
            MaInstr::FailRet => f.write_str("  fail_ret"),
            MaInstr::JumpRet => f.write_str("  jump_ret"),
            MaInstr::MoveRet(l) => op(f, "move_ret", l),
            MaInstr::CRet => f.write_str("  c_ret"),
            MaInstr::Move(a, b) => op(f, "move", &format!("{a},{b}")),
        }
    }
}

pub fn emit_ma(obj: &MaObject) -> String {
    let mut out = String::new();
    let mut prev_long = false;
    for (k, item) in obj.items.iter().enumerate() {
        match item {
            MaItem::Code(b) => {
                if k > 0 {
                    out.push('\n');
                }
                match b.kind {
                    CodeKind::Pl => {
                        let _ = writeln!(out, "pl_code {} {}", b.vis.name(), b.name);
                    }
                    CodeKind::C => {
                        let _ = writeln!(out, "c_code  {} {}", b.vis.name(), b.name);
                    }
                }
                for i in &b.body {
                    let _ = writeln!(out, "{i}");
                }
                prev_long = false;
            }
            MaItem::Long(l) => {
                if k > 0 && !prev_long {
                    out.push('\n');
                }
                let _ = write!(out, "long {} {}", l.vis.name(), l.name);
                if let Some(s) = l.size {
                    let _ = write!(out, "({s})");
                }
                if let Some(v) = l.init {
                    let _ = write!(out, " = {v}");
                }
                out.push('\n');
                prev_long = true;
            }
        }
    }
    out
}
