//! Booting a machine, the start protocol and consulting source text.

use std::collections::HashSet;
use std::io::Write;
use std::sync::OnceLock;

use thiserror::Error;

use super::builtins;
use super::code::Op;
use super::loader::{LinkedImage, LoadError, LoadMode};
use super::machine::*;
use super::word::{Atom, STerm, Word};
use crate::ma::MaObject;
use crate::pl2wam::{compile_source, CompileOpts, Diagnostic, Origin};
use crate::reader::OpTable;
use crate::wam2ma::{describe_symbol, encode_symbol, mask, translate, CALL_DYNAMIC};

pub const SYSTEM_PL: &str = include_str!("system.pl");
pub const FD_PL: &str = include_str!("fd.pl");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConsultError {
    #[error("{file}:{}: {}", .diag.line, .diag.msg)]
    Compile { file: String, diag: Diagnostic },
    #[error("{0}")]
    Load(#[from] LoadError),
    #[error("{0}")]
    Io(String),
    #[error("halt({0})")]
    Halt(i32),
    #[error("{0}")]
    Fatal(String),
}

/// Compile Prolog text to an MA object.
pub fn compile_to_ma(src: &str, file: &str, ops: &mut OpTable, opts: &CompileOpts) -> Result<(MaObject, Vec<Diagnostic>), ConsultError> {
    let out = compile_source(src, file, ops, opts);
    if let Some(d) = out.errors.first() {
        return Err(ConsultError::Compile { file: file.to_string(), diag: d.clone() });
    }
    Ok((translate(&out.file), out.warnings))
}

/// The runtime's own Prolog libraries as MA objects.
pub fn system_objects() -> &'static [(String, MaObject)] {
    static OBJS: OnceLock<Vec<(String, MaObject)>> = OnceLock::new();
    OBJS.get_or_init(|| {
        let mut out = Vec::new();
        for (name, src, origin) in [("$system", SYSTEM_PL, Origin::BuiltIn), ("$fd", FD_PL, Origin::BuiltInFd)] {
            let opts = CompileOpts { origin, ..CompileOpts::default() };
            let mut ops = OpTable::default();
            let (obj, _) = compile_to_ma(src, name, &mut ops, &opts).unwrap_or_else(|e| panic!("system library: {e}"));
            out.push((name.to_string(), obj));
        }
        out
    })
}

/// Symbols every machine defines before user objects are linked.
pub fn runtime_symbols() -> &'static HashSet<String> {
    static SYMS: OnceLock<HashSet<String>> = OnceLock::new();
    SYMS.get_or_init(|| {
        let mut s: HashSet<String> = builtins::natives().iter().map(|n| encode_symbol(n.name, n.arity)).collect();
        for (_, o) in system_objects() {
            s.extend(super::loader::defined_symbols(o));
        }
        s
    })
}

impl Machine {
    /// A machine with natives and the system libraries loaded and started.
    pub fn new(limits: Limits) -> Machine {
        let mut m = Machine::bare(limits);
        for n in builtins::natives() {
            m.register_native(n);
        }
        let from = m.objects.len();
        for (name, obj) in system_objects() {
            m.load_object(name, obj, LoadMode::System).unwrap_or_else(|e| panic!("system library: {e}"));
        }
        m.call1 = m.symbols.get(&encode_symbol("call", 1)).copied();
        m.call2 = m.symbols.get(&encode_symbol("$call", 2)).copied();
        m.call_dynamic = m.symbols.get(&encode_symbol(CALL_DYNAMIC.0, CALL_DYNAMIC.1)).copied();
        m.start_objects(from).unwrap_or_else(|e| panic!("system library start: {e}"));
        m.user_directives = 0;
        m
    }

    pub fn register_native(&mut self, n: NativeDef) {
        let id = self.natives.len() as u32;
        self.natives.push(n);
        let addr = self.code.len();
        self.code_mut().push(Op::Native(id));
        let sym = encode_symbol(n.name, n.arity);
        self.symbols.insert(sym.clone(), addr);
        self.weak_symbols.insert(sym);
        let name = self.atoms.intern(n.name);
        let file = self.atoms.intern("$system");
        self.preds.insert((name, n.arity), PredEntry { kind: PredKind::Native(id), file, line: 0, mask: mask::BUILT_IN });
    }

    pub(crate) fn create_pred(&mut self, name: Atom, arity: usize, file: Atom, line: usize, m: i64, addr: usize) {
        let kind = if m & mask::DYNAMIC != 0 {
            let same_file = self.preds.get(&(name, arity)).map(|p| p.file == file && p.kind == PredKind::Dynamic);
            if same_file == Some(true) || !self.db.contains_key(&(name, arity)) {
                self.db.insert((name, arity), DynPred::default());
            }
            PredKind::Dynamic
        } else {
            PredKind::Static(addr)
        };
        self.preds.insert((name, arity), PredEntry { kind, file, line, mask: m });
    }

    pub(crate) fn execute_directive(&mut self, file: Word, line: i64, user: bool, entry: usize) -> Res<()> {
        if user {
            self.user_directives += 1;
        }
        let file = match file {
            Word::Atm(a) => self.atoms.name(a).to_string(),
            _ => String::new(),
        };
        let kind = if user { "user" } else { "system" };
        match self.solve_once(entry) {
            Ok(true) => {}
            Ok(false) => {
                let _ = writeln!(self.err, "warning: {file}:{line}: {kind} directive failed");
            }
            Err(PlError::Throw(ball)) => {
                let msg = self.format_sterm(&ball, true);
                let _ = writeln!(self.err, "warning: {file}:{line}: {kind} directive caused exception: {msg}");
            }
            Err(e) => return Err(e),
        }
        let _ = self.out.flush();
        Ok(())
    }

    /// Run initializers, then system directives, then user directives of
    /// the objects registered from index `from` on, each pass visiting the
    /// objects in reverse registration order.
    pub fn start_objects(&mut self, from: usize) -> Res<()> {
        let objs: Vec<ObjectEntry> = self.objects[from..].iter().rev().cloned().collect();
        for o in &objs {
            self.run_c(o.init)?;
        }
        for o in &objs {
            self.run_c(o.sys)?;
        }
        for o in &objs {
            self.run_c(o.user)?;
        }
        Ok(())
    }

    /// Load a linked image's objects and run the start protocol. Returns
    /// the process exit code when no top-level follows.
    pub fn load_image(&mut self, img: &LinkedImage) -> Result<(), LoadError> {
        self.forward.clear();
        for (n, o) in &img.objects {
            self.load_object(n, o, LoadMode::Static)?;
        }
        let mut undefined = Vec::new();
        for (at, sym) in std::mem::take(&mut self.forward) {
            match self.symbols.get(&sym) {
                Some(&a) => self.code_mut()[at] = Op::PlJump(a),
                None => {
                    let d = describe_symbol(&sym);
                    if !undefined.contains(&d) {
                        undefined.push(d);
                    }
                }
            }
        }
        if !undefined.is_empty() {
            undefined.sort();
            return Err(LoadError::Undefined(undefined));
        }
        Ok(())
    }

    /// Start an image: load, run the start protocol and report the exit
    /// code. `Ok(None)` means the top-level should run next.
    pub fn start_image(&mut self, img: &LinkedImage) -> Result<Option<i32>, LoadError> {
        for src in &img.fd_sources {
            self.fd.registry.add_source(src).map_err(LoadError::Image)?;
        }
        let from = self.objects.len();
        self.load_image(img)?;
        self.user_directives = 0;
        match self.start_objects(from) {
            Ok(()) => {}
            Err(PlError::Halt(n)) => return Ok(Some(n)),
            Err(e) => {
                let _ = writeln!(self.err, "fatal error: {e}");
                return Ok(Some(1));
            }
        }
        let _ = self.out.flush();
        if img.top_level {
            return Ok(None);
        }
        if self.user_directives == 0 {
            let _ = writeln!(self.err, "warning: no initial goal executed");
            let _ = writeln!(self.err, "   use a directive :- initialization(Goal)");
            let _ = writeln!(self.err, "   or remove the link option --no-top-level");
            return Ok(Some(1));
        }
        Ok(Some(0))
    }

    /// Compile and dynamically load Prolog text, then run its initializer
    /// triple. On a compile error nothing is loaded.
    pub fn consult_text(&mut self, src: &str, file: &str) -> Result<(), ConsultError> {
        let mut ops = self.ops.clone();
        let (obj, warnings) = compile_to_ma(src, file, &mut ops, &CompileOpts::default())?;
        for w in warnings {
            let _ = writeln!(self.err, "warning: {file}:{}: {}", w.line, w.msg);
        }
        self.consult_object(file, &obj)
    }

    pub fn consult_object(&mut self, name: &str, obj: &MaObject) -> Result<(), ConsultError> {
        let from = self.objects.len();
        self.load_object(name, obj, LoadMode::Dynamic)?;
        match self.start_objects(from) {
            Ok(()) => Ok(()),
            Err(PlError::Halt(n)) => Err(ConsultError::Halt(n)),
            Err(e) => Err(ConsultError::Fatal(e.to_string())),
        }
    }

    pub fn consult_file(&mut self, path: &str) -> Result<(), ConsultError> {
        let src = std::fs::read_to_string(path).map_err(|e| ConsultError::Io(format!("{path}: {e}")))?;
        self.consult_text(&src, path)?;
        if !self.consulted.iter().any(|p| p == path) {
            self.consulted.push(path.to_string());
        }
        Ok(())
    }

    /// Text of a term copied out of the heap.
    pub fn format_sterm(&self, t: &STerm, quoted: bool) -> String {
        let term = self.sterm_to_term(t);
        crate::reader::write_term(&term, &self.ops, quoted)
    }
}
