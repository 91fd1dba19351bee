//! Prolog to WAM compiler.

mod codegen;
mod index;
pub mod instr;
mod normalize;
mod wamfile;

use std::collections::HashMap;

use thiserror::Error;

pub use instr::{Instr, PredInd, Reg, Target};
pub use wamfile::{emit_wam, parse_wam, DirectiveKind, Origin, WamDirective, WamFile, WamItem, WamParseError, WamPredicate};

use crate::reader::{OpTable, OpType, SyntaxError, TermReader};
use crate::term::{Term, VarGen};
use normalize::{split_clause, Normalizer};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompileOpts {
    pub reg_opt: bool,
    pub reorder: bool,
    pub inline: bool,
    /// Last call and last subterm optimizations.
    pub lco: bool,
    pub origin: Origin,
}

impl Default for CompileOpts {
    fn default() -> Self {
        CompileOpts { reg_opt: true, reorder: true, inline: true, lco: true, origin: Origin::User }
    }
}

impl CompileOpts {
    pub fn unoptimized() -> Self {
        CompileOpts { reg_opt: false, reorder: false, inline: false, lco: false, origin: Origin::User }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("malformed clause head: {0}")]
    Head(String),
    #[error("non-callable body goal: {0}")]
    Body(String),
    #[error("{0}")]
    Syntax(SyntaxError),
    #[error("bad directive: {0}")]
    Directive(String),
}

/// A diagnostic tied to a source line.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub line: usize,
    pub msg: String,
}

#[derive(Debug, Default)]
pub struct CompileOutput {
    pub file: WamFile,
    pub warnings: Vec<Diagnostic>,
    pub errors: Vec<Diagnostic>,
}

enum Pending {
    Pred(usize),
    Directive(usize, DirectiveKind, Term),
    Item(WamItem),
}

struct PredSrc {
    name: String,
    arity: usize,
    line: usize,
    clauses: Vec<Term>,
    dynamic: bool,
    public: bool,
    closed: bool,
}

fn pred_specs(t: &Term, out: &mut Vec<PredInd>) -> bool {
    match t {
        Term::Compound(f, a) if (f == "," || f == ".") && a.len() == 2 => pred_specs(&a[0], out) && pred_specs(&a[1], out),
        Term::Atom(a) if a == "[]" => true,
        _ => match PredInd::from_term(t) {
            Some(p) => {
                out.push(p);
                true
            }
            None => false,
        },
    }
}

struct FileCompiler<'a> {
    opts: &'a CompileOpts,
    preds: Vec<PredSrc>,
    index: HashMap<(String, usize), usize>,
    order: Vec<Pending>,
    last_pred: Option<usize>,
    out: CompileOutput,
    gen: VarGen,
    aux_counters: HashMap<String, usize>,
    directive_count: usize,
}

/// Compile Prolog source text. `ops` is updated by `op/3` directives as
/// they are met, affecting the rest of the file.
pub fn compile_source(src: &str, file_name: &str, ops: &mut OpTable, opts: &CompileOpts) -> CompileOutput {
    let mut fc = FileCompiler {
        opts,
        preds: Vec::new(),
        index: HashMap::new(),
        order: Vec::new(),
        last_pred: None,
        out: CompileOutput::default(),
        gen: VarGen::starting_at(1 << 40),
        aux_counters: HashMap::new(),
        directive_count: 0,
    };
    fc.out.file.file_name = file_name.to_string();
    let mut reader = TermReader::new(src);
    while let Some(r) = reader.next(ops) {
        match r {
            Err(e) => fc.out.errors.push(Diagnostic { line: e.line, msg: e.to_string() }),
            Ok(rt) => fc.term(rt.term, rt.line, ops),
        }
    }
    fc.finish();
    fc.out
}

impl FileCompiler<'_> {
    fn warn(&mut self, line: usize, msg: String) {
        self.out.warnings.push(Diagnostic { line, msg });
    }

    fn error(&mut self, line: usize, msg: String) {
        self.out.errors.push(Diagnostic { line, msg });
    }

    fn pred_slot(&mut self, name: &str, arity: usize, line: usize) -> usize {
        let key = (name.to_string(), arity);
        if let Some(&k) = self.index.get(&key) {
            return k;
        }
        let k = self.preds.len();
        self.preds.push(PredSrc {
            name: name.to_string(),
            arity,
            line,
            clauses: Vec::new(),
            dynamic: false,
            public: false,
            closed: false,
        });
        self.index.insert(key, k);
        self.order.push(Pending::Pred(k));
        k
    }

    fn term(&mut self, t: Term, line: usize, ops: &mut OpTable) {
        if let Term::Compound(f, a) = &t {
            if (f == ":-" || f == "?-") && a.len() == 1 {
                return self.directive(&a[0], line, ops);
            }
        }
        let (head, _) = split_clause(&t);
        let Some((name, arity)) = head.functor().filter(|_| head.is_callable()) else {
            return self.error(line, CompileError::Head(head.to_string()).to_string());
        };
        let (name, arity) = (name.to_string(), arity);
        let k = self.pred_slot(&name, arity, line);
        if let Some(prev) = self.last_pred {
            if prev != k {
                self.preds[prev].closed = true;
            }
        }
        if self.preds[k].closed && !self.preds[k].dynamic {
            self.warn(line, format!("discontiguous clauses for {name}/{arity}"));
            self.preds[k].closed = false;
        }
        self.last_pred = Some(k);
        if self.preds[k].dynamic {
            let goal = Term::compound("$add_clause", vec![t]);
            self.order.push(Pending::Directive(line, DirectiveKind::System, goal));
        } else {
            if self.preds[k].clauses.is_empty() {
                self.preds[k].line = line;
            }
            self.preds[k].clauses.push(t);
        }
    }

    fn directive(&mut self, d: &Term, line: usize, ops: &mut OpTable) {
        let a = d.args();
        match d.functor() {
            Some(("dynamic", 1)) | Some(("public", 1)) | Some(("discontiguous", 1)) | Some(("multifile", 1)) => {
                let mut specs = Vec::new();
                if !pred_specs(&a[0], &mut specs) {
                    return self.error(line, CompileError::Directive(d.to_string()).to_string());
                }
                let kind = d.functor().unwrap().0;
                for p in specs {
                    let k = self.pred_slot(&p.name, p.arity, line);
                    match kind {
                        "dynamic" => {
                            if !self.preds[k].clauses.is_empty() {
                                self.warn(line, format!("{p} declared dynamic after its clauses"));
                            }
                            self.preds[k].dynamic = true;
                            self.preds[k].public = true;
                        }
                        "public" => self.preds[k].public = true,
                        _ => {}
                    }
                }
            }
            Some(("ensure_linked", 1)) => {
                let mut specs = Vec::new();
                if !pred_specs(&a[0], &mut specs) {
                    return self.error(line, CompileError::Directive(d.to_string()).to_string());
                }
                self.order.push(Pending::Item(WamItem::EnsureLinked(specs)));
            }
            Some(("initialization", 1)) => {
                self.order.push(Pending::Directive(line, DirectiveKind::User, a[0].clone()));
            }
            Some(("op", 3)) => {
                let prio = a[0].as_int();
                let kind = a[1].as_atom().and_then(OpType::parse);
                let mut names = Vec::new();
                match &a[2] {
                    Term::Atom(n) if n != "[]" => names.push(n.clone()),
                    t => {
                        for n in t.list_items().unwrap_or_default() {
                            if let Some(s) = n.as_atom() {
                                names.push(s.to_string());
                            }
                        }
                    }
                }
                match (prio, kind) {
                    (Some(p), Some(k)) => {
                        for n in &names {
                            if let Err(e) = ops.update(n, p, k) {
                                self.warn(line, e.to_string());
                            }
                        }
                    }
                    _ => self.warn(line, format!("ignored malformed {d}")),
                }
                self.order.push(Pending::Directive(line, DirectiveKind::System, d.clone()));
            }
            _ => self.order.push(Pending::Directive(line, DirectiveKind::User, d.clone())),
        }
    }

    fn compile_pred(&mut self, name: &str, arity: usize, clauses: &[Term], out: &mut Vec<(PredInd, Vec<Instr>)>) {
        let counter = self.aux_counters.entry(format!("{name}/{arity}")).or_insert(0);
        let mut norm = Normalizer {
            gen: &mut self.gen,
            inline: self.opts.inline,
            aux: Vec::new(),
            parent: format!("{name}/{arity}"),
            counter,
        };
        let mut compiled = Vec::new();
        let mut has_cut = false;
        let mut errors = Vec::new();
        for c in clauses {
            match norm.clause(c).and_then(|nc| {
                let key = index::first_arg_key(&nc.head[..nc.arity]);
                has_cut |= nc.has_cut;
                codegen::compile_clause(&nc, self.opts).map(|code| (key, code))
            }) {
                Ok(kc) => compiled.push(kc),
                Err(e) => errors.push(e.to_string()),
            }
        }
        let aux = std::mem::take(&mut norm.aux);
        for e in errors {
            self.error(0, format!("{name}/{arity}: {e}"));
        }
        if !compiled.is_empty() {
            let code = index::build_predicate(compiled, arity, has_cut.then_some(arity));
            out.push((PredInd::new(name, arity), code));
        }
        for a in aux {
            self.compile_pred(&a.name, a.arity, &a.clauses, out);
        }
    }

    fn predicate_item(&self, p: PredInd, line: usize, dynamic: bool, public: bool, code: Vec<Instr>) -> WamItem {
        WamItem::Predicate(WamPredicate { pred: p, line, dynamic, public, origin: self.opts.origin, code })
    }

    fn finish(&mut self) {
        let order = std::mem::take(&mut self.order);
        let mut items = Vec::new();
        for p in order {
            match p {
                Pending::Pred(k) => {
                    let (name, arity, line, dynamic, public) = {
                        let s = &self.preds[k];
                        (s.name.clone(), s.arity, s.line, s.dynamic, s.public)
                    };
                    if dynamic {
                        items.push(self.predicate_item(PredInd::new(&name, arity), line, true, true, vec![]));
                        continue;
                    }
                    let clauses = std::mem::take(&mut self.preds[k].clauses);
                    if clauses.is_empty() {
                        continue;
                    }
                    let mut out = Vec::new();
                    self.compile_pred(&name, arity, &clauses, &mut out);
                    for (i, (pi, code)) in out.into_iter().enumerate() {
                        let public = i == 0 && public;
                        items.push(self.predicate_item(pi, line, false, public, code));
                    }
                }
                Pending::Directive(line, kind, goal) => {
                    self.directive_count += 1;
                    let name = format!("$directive{}", self.directive_count);
                    let clause = Term::compound(":-", vec![Term::atom(&name), goal]);
                    let mut out = Vec::new();
                    self.compile_pred(&name, 0, &[clause], &mut out);
                    let mut it = out.into_iter();
                    if let Some((_, code)) = it.next() {
                        for (pi, code) in it {
                            items.push(self.predicate_item(pi, line, false, false, code));
                        }
                        items.push(WamItem::Directive(WamDirective { line, kind, code }));
                    }
                }
                Pending::Item(i) => items.push(i),
            }
        }
        self.out.file.items = items;
    }
}
