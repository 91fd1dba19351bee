//! One-level first-argument indexing over compiled clauses.

use super::instr::{Instr, PredInd, Target};
use crate::term::Term;

#[derive(Clone, Debug, PartialEq)]
pub enum Key {
    Var,
    Atom(String),
    Int(i64),
    List,
    Struct(PredInd),
}

pub fn first_arg_key(head_args: &[Term]) -> Key {
    match head_args.first() {
        None | Some(Term::Var(_)) | Some(Term::Float(_)) => Key::Var,
        Some(Term::Atom(a)) => Key::Atom(a.clone()),
        Some(Term::Int(n)) => Key::Int(*n),
        Some(t) if t.is_functor(".", 2) => Key::List,
        Some(t) => {
            let (f, n) = t.functor().unwrap();
            Key::Struct(PredInd::new(f, n))
        }
    }
}

struct Labels(usize);

impl Labels {
    fn next(&mut self) -> usize {
        self.0 += 1;
        self.0
    }
}

/// A try/retry/trust block over clause indices, emitted under `label`.
struct Block {
    label: usize,
    clauses: Vec<usize>,
}

enum KeySwitch {
    Atom(Vec<(String, Vec<usize>)>),
    Int(Vec<(i64, Vec<usize>)>),
    Struct(Vec<(PredInd, Vec<usize>)>),
}

fn group<K: PartialEq + Clone>(items: impl Iterator<Item = (K, usize)>) -> Vec<(K, Vec<usize>)> {
    let mut out: Vec<(K, Vec<usize>)> = Vec::new();
    for (k, c) in items {
        match out.iter_mut().find(|(k2, _)| *k2 == k) {
            Some((_, v)) => v.push(c),
            None => out.push((k, vec![c])),
        }
    }
    out
}

/// Assemble the code of a predicate from its clauses' code and first
/// argument keys. `cut_reg` is set when some clause needs the cut level.
pub fn build_predicate(clauses: Vec<(Key, Vec<Instr>)>, arity: usize, cut_reg: Option<usize>) -> Vec<Instr> {
    let mut code = Vec::new();
    if let Some(r) = cut_reg {
        code.push(Instr::LoadCutLevel(r));
    }
    let n = clauses.len();
    if n == 1 {
        code.extend(clauses.into_iter().next().unwrap().1);
        return code;
    }
    let keys: Vec<Key> = clauses.iter().map(|(k, _)| k.clone()).collect();
    let has_var = keys.contains(&Key::Var);
    let mut labels = Labels(0);

    // Type buckets in switch_on_term order: atom, integer, list, structure.
    let bucket = |pred: &dyn Fn(&Key) -> bool| -> Vec<usize> {
        (0..n).filter(|&c| keys[c] == Key::Var || pred(&keys[c])).collect()
    };
    let buckets = [
        bucket(&|k| matches!(k, Key::Atom(_))),
        bucket(&|k| matches!(k, Key::Int(_))),
        bucket(&|k| matches!(k, Key::List)),
        bucket(&|k| matches!(k, Key::Struct(_))),
    ];
    let all_full = buckets.iter().all(|b| b.len() == n);
    let use_switch = arity > 0 && !all_full;

    // Phase 1: allocate labels for switch blocks, in emission order.
    enum Dest {
        Fail,
        Chain,
        Clause(usize),
        Block(usize),
    }
    let mut blocks: Vec<Block> = Vec::new();
    let mut switches: Vec<(usize, KeySwitch, Vec<Dest>)> = Vec::new();
    let mut type_dest: Vec<Dest> = Vec::new();
    if use_switch {
        for (t, b) in buckets.iter().enumerate() {
            if b.is_empty() {
                type_dest.push(Dest::Fail);
                continue;
            }
            if b.len() == n {
                type_dest.push(Dest::Chain);
                continue;
            }
            if b.len() == 1 {
                type_dest.push(Dest::Clause(b[0]));
                continue;
            }
            let ks = if has_var || t == 2 {
                None
            } else {
                match t {
                    0 => Some(KeySwitch::Atom(group(b.iter().map(|&c| match &keys[c] {
                        Key::Atom(a) => (a.clone(), c),
                        _ => unreachable!(),
                    })))),
                    1 => Some(KeySwitch::Int(group(b.iter().map(|&c| match &keys[c] {
                        Key::Int(i) => (*i, c),
                        _ => unreachable!(),
                    })))),
                    _ => Some(KeySwitch::Struct(group(b.iter().map(|&c| match &keys[c] {
                        Key::Struct(p) => (p.clone(), c),
                        _ => unreachable!(),
                    })))),
                }
            };
            let groups: Option<Vec<Vec<usize>>> = ks.as_ref().map(|k| match k {
                KeySwitch::Atom(g) => g.iter().map(|(_, v)| v.clone()).collect(),
                KeySwitch::Int(g) => g.iter().map(|(_, v)| v.clone()).collect(),
                KeySwitch::Struct(g) => g.iter().map(|(_, v)| v.clone()).collect(),
            });
            match (ks, groups) {
                (Some(ks), Some(groups)) if groups.len() >= 2 => {
                    let l = labels.next();
                    let mut dests = Vec::new();
                    for g in groups {
                        if g.len() == 1 {
                            dests.push(Dest::Clause(g[0]));
                        } else {
                            let bl = labels.next();
                            blocks.push(Block { label: bl, clauses: g });
                            dests.push(Dest::Block(bl));
                        }
                    }
                    switches.push((l, ks, dests));
                    type_dest.push(Dest::Block(l));
                }
                _ => {
                    let l = labels.next();
                    blocks.push(Block { label: l, clauses: b.clone() });
                    type_dest.push(Dest::Block(l));
                }
            }
        }
    }

    // Phase 2: chain labels (try_me_else label, code label) per clause.
    let chain: Vec<(usize, usize)> = (0..n).map(|_| (labels.next(), labels.next())).collect();
    let resolve = |d: &Dest| -> Target {
        match d {
            Dest::Fail => Target::Fail,
            Dest::Chain => Target::Label(chain[0].0),
            Dest::Clause(c) => Target::Label(chain[*c].1),
            Dest::Block(l) => Target::Label(*l),
        }
    };

    if use_switch {
        let t: Vec<Target> = type_dest.iter().map(&resolve).collect();
        code.push(Instr::SwitchOnTerm([Target::Label(chain[0].0), t[0], t[1], t[2], t[3]]));
        // Emit switch blocks and try blocks in label order.
        let mut emitted: Vec<(usize, Vec<Instr>)> = Vec::new();
        for (l, ks, dests) in switches {
            let lab = |k: usize| match resolve(&dests[k]) {
                Target::Label(x) => x,
                Target::Fail => unreachable!(),
            };
            let ins = match ks {
                KeySwitch::Atom(g) => Instr::SwitchOnAtom(g.into_iter().enumerate().map(|(k, (a, _))| (a, lab(k))).collect()),
                KeySwitch::Int(g) => Instr::SwitchOnInteger(g.into_iter().enumerate().map(|(k, (a, _))| (a, lab(k))).collect()),
                KeySwitch::Struct(g) => {
                    Instr::SwitchOnStructure(g.into_iter().enumerate().map(|(k, (a, _))| (a, lab(k))).collect())
                }
            };
            emitted.push((l, vec![ins]));
        }
        for b in &blocks {
            let mut ins = Vec::new();
            let m = b.clauses.len();
            for (k, &c) in b.clauses.iter().enumerate() {
                let target = chain[c].1;
                ins.push(if k == 0 {
                    Instr::Try(target)
                } else if k + 1 == m {
                    Instr::Trust(target)
                } else {
                    Instr::Retry(target)
                });
            }
            emitted.push((b.label, ins));
        }
        emitted.sort_by_key(|(l, _)| *l);
        for (l, ins) in emitted {
            code.push(Instr::Label(l));
            code.extend(ins);
        }
    }

    for (c, (_, body)) in clauses.into_iter().enumerate() {
        let (try_l, code_l) = chain[c];
        code.push(Instr::Label(try_l));
        code.push(if c == 0 {
            Instr::TryMeElse(chain[1].0)
        } else if c + 1 == n {
            Instr::TrustMeElseFail
        } else {
            Instr::RetryMeElse(chain[c + 1].0)
        });
        code.push(Instr::Label(code_l));
        code.extend(body);
    }
    code
}
