//! The FD store: variables, constraint stack, propagation queue and value trail.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use super::lang::{parse_fd, PType};
use super::range::Range;
use super::spec::{compile_def, eval_cond, run_prog, EvalCtx, ExtVal, Externals, Spec, Trig};

pub const NONE: u32 = u32::MAX;

pub const M_MIN: u8 = 1;
pub const M_MAX: u8 = 2;
pub const M_DOM: u8 = 4;
pub const M_VAL: u8 = 8;

/// Dependency chains of a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Chain {
    Min = 0,
    Max = 1,
    MinOrMax = 2,
    Dom = 3,
    Val = 4,
}

const CHAINS: [Chain; 5] = [Chain::Min, Chain::Max, Chain::MinOrMax, Chain::Dom, Chain::Val];

#[derive(Clone, Debug)]
pub struct FdVar {
    pub dom: Range,
    chains: [Vec<u32>; 5],
    next: u32,
    mask: u8,
    dom_stamp: u64,
    dep_stamp: u64,
    queue_stamp: u64,
    inst_stamp: u64,
    /// Heap cell holding the FDV word, or `usize::MAX` for constants.
    pub cell: usize,
}

impl FdVar {
    pub fn chain(&self, c: Chain) -> &[u32] {
        &self.chains[c as usize]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ArgVal {
    Var(u32),
    Int(i64),
    Ints(Rc<[i64]>),
    Vars(Rc<[u32]>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FrameKind {
    Prim { inst: u32, prim: u32 },
    Guard { inst: u32, switch: u32 },
}

#[derive(Clone, Debug)]
pub struct Frame {
    /// Constrained variable, `NONE` for switch guards.
    pub owner: u32,
    pub kind: FrameKind,
    pub stopped: bool,
}

#[derive(Clone, Debug)]
pub struct Inst {
    pub spec: Rc<Spec>,
    pub args: Rc<[ArgVal]>,
    fired: Vec<bool>,
    prim_frames: Vec<u32>,
}

/// Value-trail records, interleaved with binding records on the machine trail.
#[derive(Clone, Debug)]
pub enum Undo {
    Dom { v: u32, old: Range, stamp: u64, at: u64 },
    Deps { v: u32, lens: [u32; 5], stamp: u64 },
    NewVar,
    Stop(u32),
    Fired(u32, u32),
    InstFrame(u32, u32),
}

#[derive(Clone, Debug, Default)]
pub struct Stats {
    pub instrument: bool,
    pub dom_trails: u64,
    pub dep_trails: u64,
    pub frames_run: u64,
    pub waves: u64,
    pub trail_violations: u64,
    pub sched_violations: u64,
    live_trails: HashSet<(u32, u64)>,
    wave_sched: HashSet<(u32, Chain)>,
}

/// Named propagator specs plus the external range functions they may call.
#[derive(Clone)]
pub struct Registry {
    specs: HashMap<(String, usize), Rc<Spec>>,
    pub ext: Externals,
}

pub const LIB_FD: &str = include_str!("lib.fd");

impl Default for Registry {
    fn default() -> Self {
        let mut r = Registry { specs: HashMap::new(), ext: Externals::with_builtins() };
        r.add_source(LIB_FD).expect("built-in constraint library");
        r
    }
}

impl Registry {
    /// Parse and compile definitions, registering each by name/arity.
    pub fn add_source(&mut self, src: &str) -> Result<Vec<(String, usize)>, String> {
        let defs = parse_fd(src).map_err(|e| e.to_string())?;
        let mut specs = Vec::new();
        for d in &defs {
            specs.push(compile_def(d, &self.ext).map_err(|e| e.to_string())?);
        }
        let mut out = Vec::new();
        for s in specs {
            let key = (s.name.clone(), s.arity());
            out.push(key.clone());
            self.specs.insert(key, Rc::new(s));
        }
        Ok(out)
    }

    pub fn get(&self, name: &str, arity: usize) -> Option<Rc<Spec>> {
        self.specs.get(&(name.to_string(), arity)).cloned()
    }
}

static EMPTY: Range = Range::Empty;

struct Ctx<'a> {
    vars: &'a [FdVar],
    args: &'a [ArgVal],
}

impl EvalCtx for Ctx<'_> {
    fn int(&self, p: usize) -> i64 {
        match &self.args[p] {
            ArgVal::Int(n) => *n,
            ArgVal::Var(v) => self.vars[*v as usize].dom.min().unwrap_or(0),
            _ => 0,
        }
    }

    fn dom(&self, p: usize) -> &Range {
        match &self.args[p] {
            ArgVal::Var(v) => &self.vars[*v as usize].dom,
            _ => &EMPTY,
        }
    }

    fn list(&self, p: usize) -> ExtVal {
        match &self.args[p] {
            ArgVal::Ints(l) => ExtVal::Ints(l.clone()),
            ArgVal::Vars(vs) => ExtVal::Doms(vs.iter().map(|v| self.vars[*v as usize].dom.clone()).collect()),
            ArgVal::Int(n) => ExtVal::Int(*n),
            ArgVal::Var(v) => ExtVal::Range(self.vars[*v as usize].dom.clone()),
        }
    }
}

/// Readable view of an installed primitive.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameInfo {
    pub owner: u32,
    pub text: String,
    pub triggers: Vec<(u32, Trig)>,
    pub chains: Vec<(u32, Chain)>,
    pub stopped: bool,
}

pub struct Store {
    pub vars: Vec<FdVar>,
    pub frames: Vec<Frame>,
    pub insts: Vec<Inst>,
    head: u32,
    tail: u32,
    pub wave: u64,
    /// Serial of the current choice point.
    pub serial: u64,
    /// Undo records produced since the last drain.
    pub undo: Vec<Undo>,
    /// Variables that became singletons since the last drain.
    pub instantiated: Vec<u32>,
    pub registry: Registry,
    pub stats: Stats,
    /// Store every domain in bit-vector form.
    pub force_sparse: bool,
}

impl Default for Store {
    fn default() -> Self {
        Store::new(Registry::default())
    }
}

impl Store {
    pub fn new(registry: Registry) -> Self {
        Store {
            vars: Vec::new(),
            frames: Vec::new(),
            insts: Vec::new(),
            head: NONE,
            tail: NONE,
            wave: 1,
            serial: 0,
            undo: Vec::new(),
            instantiated: Vec::new(),
            registry,
            stats: Stats::default(),
            force_sparse: false,
        }
    }

    pub fn new_var(&mut self, dom: Range, cell: usize) -> Option<u32> {
        if dom.is_empty() {
            return None;
        }
        let dom = if self.force_sparse { dom.force_sparse() } else { dom };
        let v = self.vars.len() as u32;
        let inst = dom.singleton().is_some();
        self.vars.push(FdVar {
            dom,
            chains: Default::default(),
            next: NONE,
            mask: 0,
            dom_stamp: 0,
            dep_stamp: 0,
            queue_stamp: 0,
            inst_stamp: if inst { self.wave } else { 0 },
            cell,
        });
        self.undo.push(Undo::NewVar);
        Some(v)
    }

    pub fn dom(&self, v: u32) -> &Range {
        &self.vars[v as usize].dom
    }

    /// Constraint stack top, as saved in choice points.
    pub fn cs(&self) -> i64 {
        ((self.frames.len() as i64) << 32) | self.insts.len() as i64
    }

    pub fn restore_cs(&mut self, cs: i64) {
        self.frames.truncate((cs >> 32) as usize);
        self.insts.truncate((cs & 0xffff_ffff) as usize);
        self.clear_queue();
    }

    pub fn clear_queue(&mut self) {
        self.head = NONE;
        self.tail = NONE;
        self.wave += 1;
        self.instantiated.clear();
    }

    pub fn apply_undo(&mut self, u: Undo) {
        match u {
            Undo::Dom { v, old, stamp, at } => {
                if self.stats.instrument {
                    self.stats.live_trails.remove(&(v, at));
                }
                let x = &mut self.vars[v as usize];
                x.dom = old;
                x.dom_stamp = stamp;
            }
            Undo::Deps { v, lens, stamp } => {
                let x = &mut self.vars[v as usize];
                for (c, n) in x.chains.iter_mut().zip(lens) {
                    c.truncate(n as usize);
                }
                x.dep_stamp = stamp;
            }
            Undo::NewVar => {
                self.vars.pop();
            }
            Undo::Stop(f) => {
                if let Some(fr) = self.frames.get_mut(f as usize) {
                    fr.stopped = false;
                }
            }
            Undo::Fired(i, s) => {
                if let Some(inst) = self.insts.get_mut(i as usize) {
                    inst.fired[s as usize] = false;
                }
            }
            Undo::InstFrame(i, p) => {
                if let Some(inst) = self.insts.get_mut(i as usize) {
                    inst.prim_frames[p as usize] = NONE;
                }
            }
        }
    }

    fn enqueue(&mut self, v: u32, mask: u8) {
        let wave = self.wave;
        let x = &mut self.vars[v as usize];
        if x.queue_stamp == wave {
            x.mask |= mask;
            return;
        }
        x.queue_stamp = wave;
        x.mask = mask;
        x.next = NONE;
        if self.tail == NONE {
            self.head = v;
        } else {
            self.vars[self.tail as usize].next = v;
        }
        self.tail = v;
    }

    /// Intersect the domain of `v` with `r`. Returns false on an empty result.
    pub fn tell(&mut self, v: u32, r: &Range) -> bool {
        let serial = self.serial;
        let x = &self.vars[v as usize];
        let new = x.dom.intersect(r);
        if new.is_empty() {
            return false;
        }
        if new.size() == x.dom.size() {
            return true;
        }
        let new = if self.force_sparse { new.force_sparse() } else { new };
        let mut mask = M_DOM;
        if new.min() != x.dom.min() {
            mask |= M_MIN;
        }
        if new.max() != x.dom.max() {
            mask |= M_MAX;
        }
        let single = new.singleton().is_some();
        if single {
            mask |= M_VAL;
        }
        if x.dom_stamp != serial {
            let old = std::mem::replace(&mut self.vars[v as usize].dom, new);
            let x = &mut self.vars[v as usize];
            self.undo.push(Undo::Dom { v, old, stamp: x.dom_stamp, at: serial });
            x.dom_stamp = serial;
            self.stats.dom_trails += 1;
            if self.stats.instrument && !self.stats.live_trails.insert((v, serial)) {
                self.stats.trail_violations += 1;
            }
        } else {
            self.vars[v as usize].dom = new;
        }
        if single {
            self.vars[v as usize].inst_stamp = self.wave;
            self.instantiated.push(v);
        }
        self.enqueue(v, mask);
        true
    }

    fn link(&mut self, v: u32, c: Chain, f: u32) {
        let serial = self.serial;
        let x = &mut self.vars[v as usize];
        if x.dep_stamp != serial {
            let lens = std::array::from_fn(|k| x.chains[k].len() as u32);
            self.undo.push(Undo::Deps { v, lens, stamp: x.dep_stamp });
            x.dep_stamp = serial;
            self.stats.dep_trails += 1;
        }
        x.chains[c as usize].push(f);
    }

    fn arg_vars(args: &[ArgVal], p: usize) -> Vec<u32> {
        match &args[p] {
            ArgVal::Var(v) => vec![*v],
            ArgVal::Vars(vs) => vs.to_vec(),
            _ => vec![],
        }
    }

    /// Chains a frame with the given triggers is linked into, per variable.
    fn chains_for(args: &[ArgVal], triggers: &[(usize, Trig)]) -> Vec<(u32, Chain)> {
        let mut per: Vec<(u32, [bool; 4])> = Vec::new();
        for &(p, t) in triggers {
            for v in Self::arg_vars(args, p) {
                let k = match per.iter().position(|(x, _)| *x == v) {
                    Some(k) => k,
                    None => {
                        per.push((v, [false; 4]));
                        per.len() - 1
                    }
                };
                per[k].1[t as usize] = true;
            }
        }
        per.into_iter()
            .map(|(v, [min, max, dom, val])| {
                let c = if dom {
                    Chain::Dom
                } else if min && max {
                    Chain::MinOrMax
                } else if min {
                    Chain::Min
                } else if max {
                    Chain::Max
                } else {
                    debug_assert!(val);
                    Chain::Val
                };
                (v, c)
            })
            .collect()
    }

    /// Push the instance record and start its initial primitives and guards.
    /// Propagation is left to the caller.
    pub fn install(&mut self, spec: Rc<Spec>, args: Vec<ArgVal>) -> bool {
        let inst = self.insts.len() as u32;
        self.insts.push(Inst {
            spec: spec.clone(),
            args: args.into(),
            fired: vec![false; spec.switches.len()],
            prim_frames: vec![NONE; spec.prims.len()],
        });
        for (p, ps) in spec.prims.iter().enumerate() {
            if ps.initial && !self.start_prim(inst, p) {
                return false;
            }
        }
        for s in 0..spec.switches.len() {
            let fid = self.frames.len() as u32;
            self.frames.push(Frame { owner: NONE, kind: FrameKind::Guard { inst, switch: s as u32 }, stopped: false });
            let args = self.insts[inst as usize].args.clone();
            for (v, c) in Self::chains_for(&args, &spec.switches[s].triggers) {
                self.link(v, c, fid);
            }
            if !self.eval_frame(fid) {
                return false;
            }
        }
        true
    }

    /// Install then propagate to a fixpoint.
    pub fn post(&mut self, spec: Rc<Spec>, args: Vec<ArgVal>) -> bool {
        let ok = self.install(spec, args) && self.propagate();
        if !ok {
            self.clear_queue();
        }
        ok
    }

    fn start_prim(&mut self, inst: u32, p: usize) -> bool {
        let (spec, args) = {
            let i = &self.insts[inst as usize];
            (i.spec.clone(), i.args.clone())
        };
        let ps = &spec.prims[p];
        let owner = match args[ps.target] {
            ArgVal::Var(v) => v,
            _ => return false,
        };
        let fid = self.frames.len() as u32;
        self.frames.push(Frame { owner, kind: FrameKind::Prim { inst, prim: p as u32 }, stopped: false });
        self.insts[inst as usize].prim_frames[p] = fid;
        self.undo.push(Undo::InstFrame(inst, p as u32));
        for (v, c) in Self::chains_for(&args, &ps.triggers) {
            self.link(v, c, fid);
        }
        self.eval_frame(fid)
    }

    fn eval_frame(&mut self, fid: u32) -> bool {
        let fr = &self.frames[fid as usize];
        if fr.stopped {
            return true;
        }
        let owner = fr.owner;
        match fr.kind {
            FrameKind::Prim { inst, prim } => {
                let (spec, args) = {
                    let i = &self.insts[inst as usize];
                    (i.spec.clone(), i.args.clone())
                };
                let ps = &spec.prims[prim as usize];
                for &d in &ps.delayed {
                    if let ArgVal::Var(x) = args[d] {
                        if self.vars[x as usize].dom.singleton().is_none() {
                            return true;
                        }
                    }
                }
                let r = run_prog(&ps.prog, &Ctx { vars: &self.vars, args: &args }, &self.registry.ext);
                self.stats.frames_run += 1;
                self.tell(owner, &r)
            }
            FrameKind::Guard { inst, switch } => self.run_guard(inst, switch as usize),
        }
    }

    fn run_guard(&mut self, inst: u32, sw: usize) -> bool {
        if self.insts[inst as usize].fired[sw] {
            return true;
        }
        let (spec, args) = {
            let i = &self.insts[inst as usize];
            (i.spec.clone(), i.args.clone())
        };
        self.stats.frames_run += 1;
        let fired = spec.switches[sw].cases.iter().find(|c| eval_cond(&c.cond, &Ctx { vars: &self.vars, args: &args }));
        let Some(case) = fired else { return true };
        self.insts[inst as usize].fired[sw] = true;
        self.undo.push(Undo::Fired(inst, sw as u32));
        for &s in &case.stops {
            let f = self.insts[inst as usize].prim_frames[s];
            if f != NONE && !self.frames[f as usize].stopped {
                self.frames[f as usize].stopped = true;
                self.undo.push(Undo::Stop(f));
            }
        }
        for &s in &case.starts {
            if !self.start_prim(inst, s) {
                return false;
            }
        }
        true
    }

    /// Run the queue to a fixpoint. Returns false on failure (queue cleared).
    pub fn propagate(&mut self) -> bool {
        let start = self.wave;
        while self.head != NONE {
            let mut cur = Vec::new();
            let mut v = self.head;
            while v != NONE {
                let x = &self.vars[v as usize];
                cur.push((v, x.mask));
                v = x.next;
            }
            self.head = NONE;
            self.tail = NONE;
            self.wave += 1;
            self.stats.waves += 1;
            if self.stats.instrument {
                self.stats.wave_sched.clear();
            }
            for (v, m) in cur {
                for c in CHAINS {
                    let run = match c {
                        Chain::Min => m & M_MIN != 0,
                        Chain::Max => m & M_MAX != 0,
                        Chain::MinOrMax => m & (M_MIN | M_MAX) != 0,
                        Chain::Dom => m & (M_MIN | M_MAX | M_DOM) != 0,
                        Chain::Val => m & M_VAL != 0,
                    };
                    if !run || self.vars[v as usize].chains[c as usize].is_empty() {
                        continue;
                    }
                    if self.stats.instrument && !self.stats.wave_sched.insert((v, c)) {
                        self.stats.sched_violations += 1;
                    }
                    let mut i = 0;
                    while i < self.vars[v as usize].chains[c as usize].len() {
                        let fid = self.vars[v as usize].chains[c as usize][i];
                        i += 1;
                        let fr = &self.frames[fid as usize];
                        if fr.stopped {
                            continue;
                        }
                        if fr.owner != NONE {
                            let o = &self.vars[fr.owner as usize];
                            if o.inst_stamp < start && o.dom.singleton().is_some() {
                                continue;
                            }
                        }
                        if !self.eval_frame(fid) {
                            self.clear_queue();
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Every active primitive re-evaluated against the current store leaves
    /// its owner's domain unchanged.
    pub fn at_fixpoint(&self) -> bool {
        self.frames.iter().all(|fr| {
            let FrameKind::Prim { inst, prim } = fr.kind else { return true };
            if fr.stopped {
                return true;
            }
            let i = &self.insts[inst as usize];
            let ps = &i.spec.prims[prim as usize];
            let ctx = Ctx { vars: &self.vars, args: &i.args };
            if ps.delayed.iter().any(|&d| ctx.dom(d).singleton().is_none()) {
                return true;
            }
            let r = run_prog(&ps.prog, &ctx, &self.registry.ext);
            let d = &self.vars[fr.owner as usize].dom;
            d.intersect(&r).size() == d.size()
        })
    }

    pub fn frame_info(&self, fid: u32) -> FrameInfo {
        let fr = &self.frames[fid as usize];
        let (inst, text, triggers) = match fr.kind {
            FrameKind::Prim { inst, prim } => {
                let i = &self.insts[inst as usize];
                (inst, i.spec.show_prim(prim as usize), i.spec.prims[prim as usize].triggers.clone())
            }
            FrameKind::Guard { inst, switch } => {
                let i = &self.insts[inst as usize];
                (inst, format!("{} wait_switch", i.spec.name), i.spec.switches[switch as usize].triggers.clone())
            }
        };
        let args = &self.insts[inst as usize].args;
        let mut tv = Vec::new();
        for (p, t) in triggers.iter() {
            for v in Self::arg_vars(args, *p) {
                tv.push((v, *t));
            }
        }
        FrameInfo { owner: fr.owner, text, chains: Self::chains_for(args, &triggers), triggers: tv, stopped: fr.stopped }
    }

    /// Parameter types of a registered constraint.
    pub fn signature(&self, name: &str, arity: usize) -> Option<Vec<PType>> {
        self.registry.get(name, arity).map(|s| s.params.iter().map(|p| p.ty).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::super::range::MAX_INTEGER;
    use super::*;

    fn var(s: &mut Store, lo: i64, hi: i64) -> u32 {
        s.new_var(Range::interval(lo, hi), usize::MAX).unwrap()
    }

    fn post(s: &mut Store, name: &str, args: Vec<ArgVal>) -> bool {
        let spec = s.registry.get(name, args.len()).unwrap();
        s.post(spec, args)
    }

    #[test]
    fn x_lte_y_bounds() {
        let mut s = Store::default();
        let (x, y) = (var(&mut s, 0, 10), var(&mut s, 0, 5));
        assert!(post(&mut s, "x_lte_y", vec![ArgVal::Var(x), ArgVal::Var(y)]));
        assert_eq!(*s.dom(x), Range::Interval(0, 5));
        assert_eq!(*s.dom(y), Range::Interval(0, 5));
    }

    #[test]
    fn truth_x_eq_c_fires() {
        let mut s = Store::default();
        let (x, b) = (var(&mut s, 1, 3), var(&mut s, 0, 1));
        assert!(post(&mut s, "truth_x_eq_c", vec![ArgVal::Var(x), ArgVal::Int(5), ArgVal::Var(b)]));
        assert_eq!(*s.dom(b), Range::single(0));
    }

    #[test]
    fn min_x_a_eq_z() {
        let mut s = Store::default();
        let (x, z) = (var(&mut s, 3, 7), var(&mut s, 0, MAX_INTEGER));
        assert!(post(&mut s, "min_x_a_eq_z", vec![ArgVal::Var(x), ArgVal::Int(5), ArgVal::Var(z)]));
        assert_eq!(*s.dom(z), Range::Interval(3, 5));
        assert!(s.at_fixpoint());
    }

    #[test]
    fn tell_trails_once_per_serial() {
        let mut s = Store::default();
        let x = var(&mut s, 0, 9);
        s.undo.clear();
        s.serial = 7;
        assert!(s.tell(x, &Range::interval(3, 9)));
        assert!(s.tell(x, &Range::interval(3, 5)));
        assert_eq!(s.undo.iter().filter(|u| matches!(u, Undo::Dom { .. })).count(), 1);
        for u in std::mem::take(&mut s.undo).into_iter().rev() {
            s.apply_undo(u);
        }
        assert_eq!(*s.dom(x), Range::Interval(0, 9));
        assert!(!s.tell(x, &Range::interval(10, 12)));
    }

    #[test]
    fn equality_network_terminates() {
        let mut s = Store::default();
        let (x, y) = (var(&mut s, 0, 9), var(&mut s, 0, 9));
        assert!(post(&mut s, "x_eq_y", vec![ArgVal::Var(x), ArgVal::Var(y)]));
        assert!(post(&mut s, "x_eq_y", vec![ArgVal::Var(y), ArgVal::Var(x)]));
        assert!(s.tell(x, &Range::single(3)));
        assert!(s.propagate());
        assert_eq!(*s.dom(y), Range::single(3));
    }
}
