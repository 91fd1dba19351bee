//! Loading MA objects into a machine, static linking and images.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::rc::Rc;

use thiserror::Error;

use super::code::{Dst, Kind, Op, Opnd, Prim};
use super::machine::Machine;
use crate::ma::{emit_ma, parse_ma, Arg, CodeKind, Loc, MaInstr, MaObject, Vis};
use crate::wam2ma::describe_symbol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoadError {
    #[error("undefined predicate(s): {}", .0.join(", "))]
    Undefined(Vec<String>),
    #[error("duplicate definition of {0}")]
    Duplicate(String),
    #[error("{block}: instruction {index}: {msg}")]
    Verify { block: String, index: usize, msg: String },
    #[error("{0}")]
    Image(String),
}

fn verify_err(block: &str, index: usize, msg: impl Into<String>) -> LoadError {
    LoadError::Verify { block: block.to_string(), index, msg: msg.into() }
}

fn arg_fits(a: &Arg, k: Kind) -> bool {
    match k {
        Kind::Val => matches!(a, Arg::Int(_) | Arg::Float(_) | Arg::X(_) | Arg::Y(_) | Arg::Mem(..)),
        Kind::Int => matches!(a, Arg::Int(_)),
        Kind::Flt => matches!(a, Arg::Float(_)),
        Kind::Str => matches!(a, Arg::Str(_)),
        Kind::Code | Kind::Codes => matches!(a, Arg::Addr(_)),
        Kind::RegAddr => matches!(a, Arg::XAddr(_) | Arg::YAddr(_)),
    }
}

/// Check runtime function names, operand kinds and that every `*_ret`
/// directly follows a `call_c` whose result it may consume.
pub fn verify(obj: &MaObject) -> Result<(), LoadError> {
    for b in obj.code() {
        let mut prev: Option<Prim> = None;
        for (i, ins) in b.body.iter().enumerate() {
            match ins {
                MaInstr::CallC(name, args) => {
                    let p = Prim::from_name(name).ok_or_else(|| verify_err(&b.name, i, format!("unknown runtime function {name}")))?;
                    let sig = p.signature();
                    let ok = match sig {
                        [Kind::Codes] => args.iter().all(|a| arg_fits(a, Kind::Codes)),
                        _ => sig.len() == args.len() && args.iter().zip(sig).all(|(a, k)| arg_fits(a, *k)),
                    };
                    if !ok {
                        return Err(verify_err(&b.name, i, format!("bad operands for {name}")));
                    }
                    if b.kind == CodeKind::C && !matches!(p, Prim::NewObject | Prim::CreateAtom | Prim::CreateAtomTagged | Prim::CreateFunctor | Prim::CreateSwtTable | Prim::CreateSwtAtm | Prim::CreateSwtInt | Prim::CreateSwtStc | Prim::CreatePred | Prim::ExecuteDirective | Prim::EnsureLinked) {
                        return Err(verify_err(&b.name, i, format!("{name} not allowed in c_code")));
                    }
                    prev = Some(p);
                    continue;
                }
                MaInstr::FailRet | MaInstr::JumpRet | MaInstr::MoveRet(_) => match prev {
                    Some(p) if p.returns() => {}
                    Some(p) => return Err(verify_err(&b.name, i, format!("*_ret after {p:?}, which returns nothing"))),
                    None => return Err(verify_err(&b.name, i, "*_ret without a preceding call_c")),
                },
                _ => {}
            }
            prev = None;
        }
    }
    Ok(())
}

/// Global code symbols defined by an object.
pub fn defined_symbols(obj: &MaObject) -> Vec<String> {
    obj.code().filter(|b| b.vis == Vis::Global).map(|b| b.name.clone()).collect()
}

/// Symbols referenced by an object and not defined locally.
pub fn referenced_symbols(obj: &MaObject) -> Vec<String> {
    let mut local: HashSet<&str> = HashSet::new();
    for b in obj.code() {
        local.insert(&b.name);
        for i in &b.body {
            if let MaInstr::Label(l) = i {
                local.insert(l);
            }
        }
    }
    for l in obj.longs() {
        local.insert(&l.name);
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut add = |s: &String| {
        if !local.contains(s.as_str()) && seen.insert(s.clone()) {
            out.push(s.clone());
        }
    };
    for b in obj.code() {
        for i in &b.body {
            match i {
                MaInstr::PlCall(s) | MaInstr::PlJump(s) | MaInstr::Jump(s) => add(s),
                MaInstr::CallC(_, args) => {
                    for a in args {
                        if let Arg::Addr(s) = a {
                            add(s);
                        }
                    }
                }
                _ => {}
            }
        }
    }
    out
}

/// A library: members are single objects, included only when needed.
#[derive(Clone, Debug, Default)]
pub struct Library {
    pub name: String,
    pub members: Vec<(String, MaObject)>,
}

#[derive(Clone, Debug, Default)]
pub struct LinkedImage {
    /// Objects in link order.
    pub objects: Vec<(String, MaObject)>,
    /// Global symbol -> index of the defining object.
    pub symbols: BTreeMap<String, usize>,
    pub top_level: bool,
    /// Extra constraint definitions in FD source form.
    pub fd_sources: Vec<String>,
}

/// Link explicit objects against libraries. `provided` are the symbols
/// the runtime defines itself.
pub fn link(explicit: Vec<(String, MaObject)>, libs: &[Library], provided: &HashSet<String>) -> Result<LinkedImage, LoadError> {
    let mut img = LinkedImage::default();
    let add = |img: &mut LinkedImage, name: String, obj: MaObject| -> Result<(), LoadError> {
        verify(&obj)?;
        let k = img.objects.len();
        for s in defined_symbols(&obj) {
            if img.symbols.insert(s.clone(), k).is_some() {
                return Err(LoadError::Duplicate(describe_symbol(&s)));
            }
        }
        img.objects.push((name, obj));
        Ok(())
    };
    for (n, o) in explicit {
        add(&mut img, n, o)?;
    }
    let mut used: HashSet<(usize, usize)> = HashSet::new();
    loop {
        let undefined = undefined_symbols(&img, provided);
        if undefined.is_empty() {
            break;
        }
        let mut pulled = false;
        'libs: for (li, lib) in libs.iter().enumerate() {
            for (mi, (n, m)) in lib.members.iter().enumerate() {
                if used.contains(&(li, mi)) {
                    continue;
                }
                if defined_symbols(m).iter().any(|s| undefined.contains(s)) {
                    used.insert((li, mi));
                    add(&mut img, n.clone(), m.clone())?;
                    pulled = true;
                    break 'libs;
                }
            }
        }
        if !pulled {
            let mut names: Vec<String> = undefined.iter().map(|s| describe_symbol(s)).collect();
            names.sort();
            return Err(LoadError::Undefined(names));
        }
    }
    Ok(img)
}

fn undefined_symbols(img: &LinkedImage, provided: &HashSet<String>) -> Vec<String> {
    let mut out = Vec::new();
    for (_, o) in &img.objects {
        for s in referenced_symbols(o) {
            if !img.symbols.contains_key(&s) && !provided.contains(&s) && !out.contains(&s) {
                out.push(s);
            }
        }
    }
    out
}

const IMAGE_MAGIC: &str = "%% gplc image 1";

impl LinkedImage {
    /// Text container: a header, the symbol table, then each object's MA
    /// text between `%% object` and `%% end` lines.
    pub fn serialize(&self) -> String {
        let mut s = format!("{IMAGE_MAGIC}\n%% top_level {}\n", if self.top_level { "yes" } else { "no" });
        for (sym, k) in &self.symbols {
            s.push_str(&format!("%% symbol {sym} {k}\n"));
        }
        for src in &self.fd_sources {
            s.push_str("%% fd\n");
            s.push_str(src);
            if !src.ends_with('\n') {
                s.push('\n');
            }
            s.push_str("%% end\n");
        }
        for (n, o) in &self.objects {
            s.push_str(&format!("%% object {n}\n"));
            s.push_str(&emit_ma(o));
            s.push_str("%% end\n");
        }
        s
    }

    pub fn deserialize(text: &str) -> Result<LinkedImage, LoadError> {
        let bad = |m: &str| LoadError::Image(m.to_string());
        let mut lines = text.lines();
        if lines.next() != Some(IMAGE_MAGIC) {
            return Err(bad("not an image file"));
        }
        let mut img = LinkedImage::default();
        let mut cur: Option<(String, String)> = None;
        for l in lines {
            if let Some((name, body)) = cur.as_mut() {
                if l == "%% end" {
                    if name.is_empty() {
                        img.fd_sources.push(std::mem::take(body));
                    } else {
                        let obj = parse_ma(body).map_err(|e| LoadError::Image(format!("{name}: {e}")))?;
                        img.objects.push((name.clone(), obj));
                    }
                    cur = None;
                } else {
                    body.push_str(l);
                    body.push('\n');
                }
                continue;
            }
            if let Some(v) = l.strip_prefix("%% top_level ") {
                img.top_level = v == "yes";
            } else if let Some(v) = l.strip_prefix("%% symbol ") {
                let (sym, k) = v.rsplit_once(' ').ok_or_else(|| bad("bad symbol line"))?;
                img.symbols.insert(sym.to_string(), k.parse().map_err(|_| bad("bad symbol index"))?);
            } else if l == "%% fd" {
                cur = Some((String::new(), String::new()));
            } else if let Some(n) = l.strip_prefix("%% object ") {
                cur = Some((n.to_string(), String::new()));
            } else if !l.trim().is_empty() {
                return Err(bad("unexpected line"));
            }
        }
        if cur.is_some() {
            return Err(bad("unterminated object"));
        }
        Ok(img)
    }
}

/// How global symbol clashes and unresolved references are treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoadMode {
    /// Runtime library code: its symbols may be overridden later.
    System,
    /// Statically linked objects: duplicates and unresolved symbols are errors.
    Static,
    /// Consulted code: redefinitions replace, unresolved symbols are looked
    /// up when reached.
    Dynamic,
}

impl Machine {
    /// Decode an object into the code area, resolve its symbols and run
    /// its `initializer` block, which registers the object.
    pub fn load_object(&mut self, name: &str, obj: &MaObject, mode: LoadMode) -> Result<(), LoadError> {
        verify(obj)?;
        // Data areas.
        let mut data: HashMap<&str, usize> = HashMap::new();
        for l in obj.longs() {
            data.insert(&l.name, self.data.len());
            let n = l.size.unwrap_or(1).max(1);
            let init = super::word::Word::Int(l.init.unwrap_or(0));
            self.data.extend(std::iter::repeat_n(init, n));
        }
        // Addresses of blocks and labels.
        let base = self.code.len();
        let mut local: HashMap<&str, usize> = HashMap::new();
        let mut at = base;
        for b in obj.code() {
            local.insert(&b.name, at);
            for i in &b.body {
                match i {
                    MaInstr::Label(l) => {
                        local.insert(l, at);
                    }
                    _ => at += 1,
                }
            }
        }
        // Global definitions.
        let mut replaced = Vec::new();
        for b in obj.code().filter(|b| b.vis == Vis::Global) {
            let addr = local[b.name.as_str()];
            if let Some(&old) = self.symbols.get(&b.name) {
                let weak = self.weak_symbols.contains(&b.name);
                if mode == LoadMode::Static && !weak {
                    return Err(LoadError::Duplicate(describe_symbol(&b.name)));
                }
                replaced.push((old, addr));
            }
        }
        let mut undefined = Vec::new();
        let mut stubs: Vec<Op> = Vec::new();
        let stub_base = at;
        let mut resolve = |m: &Machine, s: &str, stubs: &mut Vec<Op>| -> usize {
            if let Some(&a) = local.get(s) {
                return a;
            }
            if let Some(&a) = m.symbols.get(s) {
                return a;
            }
            if mode == LoadMode::System && !undefined.contains(&describe_symbol(s)) {
                undefined.push(describe_symbol(s));
            }
            stubs.push(Op::Undefined(Rc::from(s)));
            stub_base + stubs.len() - 1
        };
        let mut ops = Vec::with_capacity(at - base);
        for b in obj.code() {
            for i in &b.body {
                let op = match i {
                    MaInstr::Label(_) => continue,
                    MaInstr::PlJump(s) => Op::PlJump(resolve(self, s, &mut stubs)),
                    MaInstr::PlCall(s) => Op::PlCall(resolve(self, s, &mut stubs)),
                    MaInstr::Jump(s) => Op::Jump(resolve(self, s, &mut stubs)),
                    MaInstr::PlRet => Op::PlRet,
                    MaInstr::PlFail => Op::PlFail,
                    MaInstr::FailRet => Op::FailRet,
                    MaInstr::JumpRet => Op::JumpRet,
                    MaInstr::CRet => Op::CRet,
                    MaInstr::MoveRet(l) => Op::MoveRet(dst(l, &data)),
                    MaInstr::Move(a, b) => Op::Move(dst(a, &data), dst(b, &data)),
                    MaInstr::CallC(f, args) => {
                        let p = Prim::from_name(f).expect("verified");
                        let mut os = Vec::with_capacity(args.len());
                        for a in args {
                            os.push(match a {
                                Arg::Int(n) => Opnd::Int(*n),
                                Arg::Float(x) => Opnd::Flt(*x),
                                Arg::Str(s) => Opnd::Str(Rc::from(s.as_str())),
                                Arg::Addr(s) => match data.get(s.as_str()) {
                                    Some(&d) => Opnd::MemAddr(d),
                                    None => Opnd::Code(resolve(self, s, &mut stubs)),
                                },
                                Arg::XAddr(i) => Opnd::XAddr(*i),
                                Arg::YAddr(i) => Opnd::YAddr(*i),
                                Arg::X(i) => Opnd::X(*i),
                                Arg::Y(i) => Opnd::Y(*i),
                                Arg::Mem(n, k) => Opnd::Mem(data.get(n.as_str()).copied().unwrap_or(0) + k.unwrap_or(0)),
                            });
                        }
                        Op::CallC(p, os.into())
                    }
                };
                ops.push(op);
            }
        }
        if !undefined.is_empty() {
            undefined.sort();
            return Err(LoadError::Undefined(undefined));
        }
        let init = obj.code().find(|b| b.vis == Vis::Initializer).map(|b| local[b.name.as_str()]);
        let globals: Vec<(String, usize)> =
            obj.code().filter(|b| b.vis == Vis::Global).map(|b| (b.name.clone(), local[b.name.as_str()])).collect();
        if mode == LoadMode::Static {
            for (i, st) in stubs.iter().enumerate() {
                if let Op::Undefined(sym) = st {
                    self.forward.push((stub_base + i, sym.to_string()));
                }
            }
        }
        let code = self.code_mut();
        code.extend(ops);
        code.extend(stubs);
        // Old entry points of replaced predicates now lead to the new code.
        for (old, new) in replaced {
            self.code_mut()[old] = Op::PlJump(new);
        }
        for (s, a) in globals {
            if mode == LoadMode::System {
                self.weak_symbols.insert(s.clone());
            } else {
                self.weak_symbols.remove(&s);
            }
            self.symbols.insert(s, a);
        }
        if let Some(init) = init {
            self.loading = Some(name.to_string());
            let r = self.run_c(init);
            self.loading = None;
            r.map_err(|e| LoadError::Image(format!("{name}: initializer: {e}")))?;
        }
        Ok(())
    }

    /// Run a c_code block to its `c_ret`.
    pub fn run_c(&mut self, addr: usize) -> super::machine::Res<bool> {
        let saved = (self.p, self.cp, self.e);
        self.p = addr;
        let r = self.run();
        (self.p, self.cp, self.e) = saved;
        r
    }
}

fn dst(l: &Loc, data: &HashMap<&str, usize>) -> Dst {
    match l {
        Loc::X(i) => Dst::X(*i),
        Loc::Y(i) => Dst::Y(*i),
        Loc::Mem(n, k) => Dst::Mem(data.get(n.as_str()).copied().unwrap_or(0) + k.unwrap_or(0)),
    }
}
