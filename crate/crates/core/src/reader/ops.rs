use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpType {
    Xfx,
    Xfy,
    Yfx,
    Fy,
    Fx,
    Xf,
    Yf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpClass {
    Prefix,
    Infix,
    Postfix,
}

impl OpType {
    pub fn parse(s: &str) -> Option<OpType> {
        Some(match s {
            "xfx" => OpType::Xfx,
            "xfy" => OpType::Xfy,
            "yfx" => OpType::Yfx,
            "fy" => OpType::Fy,
            "fx" => OpType::Fx,
            "xf" => OpType::Xf,
            "yf" => OpType::Yf,
            _ => return None,
        })
    }

    pub fn class(self) -> OpClass {
        match self {
            OpType::Xfx | OpType::Xfy | OpType::Yfx => OpClass::Infix,
            OpType::Fy | OpType::Fx => OpClass::Prefix,
            OpType::Xf | OpType::Yf => OpClass::Postfix,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OpType::Xfx => "xfx",
            OpType::Xfy => "xfy",
            OpType::Yfx => "yfx",
            OpType::Fy => "fy",
            OpType::Fx => "fx",
            OpType::Xf => "xf",
            OpType::Yf => "yf",
        }
    }
}

impl fmt::Display for OpType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpDef {
    pub priority: u16,
    pub kind: OpType,
}

impl OpDef {
    /// Maximum priorities of the (left, right) arguments.
    pub fn arg_priorities(&self) -> (u16, u16) {
        let p = self.priority;
        match self.kind {
            OpType::Xfx => (p - 1, p - 1),
            OpType::Xfy => (p - 1, p),
            OpType::Yfx => (p, p - 1),
            OpType::Fy => (0, p),
            OpType::Fx => (0, p - 1),
            OpType::Xf => (p - 1, 0),
            OpType::Yf => (p, 0),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Entry {
    prefix: Option<OpDef>,
    infix: Option<OpDef>,
    postfix: Option<OpDef>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OpError {
    #[error("operator priority {0} out of range 0..1200")]
    Priority(i64),
    #[error("unknown operator type {0}")]
    Type(String),
    #[error("operator {name} cannot be both infix and postfix")]
    Conflict { name: String },
    #[error("operator ',' cannot be modified")]
    Comma,
}

/// Mutable operator table used by the reader and the writer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpTable {
    entries: HashMap<String, Entry>,
}

const DEFAULT_OPS: &[(u16, OpType, &[&str])] = &[
    (1200, OpType::Xfx, &[":-", "-->"]),
    (1200, OpType::Fx, &[":-", "?-"]),
    (1150, OpType::Fx, &["dynamic", "discontiguous", "initialization", "ensure_linked", "multifile", "public"]),
    (1100, OpType::Xfy, &[";", "|"]),
    (1050, OpType::Xfy, &["->", "*->"]),
    (900, OpType::Fy, &["\\+"]),
    (
        700,
        OpType::Xfx,
        &[
            "=", "\\=", "==", "\\==", "@<", "@>", "@=<", "@>=", "=..", "is", "=:=", "=\\=", "<", ">", "=<", ">=",
            "#=", "#\\=", "#<", "#=<", "#>", "#>=",
        ],
    ),
    (600, OpType::Xfy, &[":"]),
    (500, OpType::Yfx, &["+", "-", "/\\", "\\/"]),
    (400, OpType::Yfx, &["*", "/", "//", "rem", "mod", "div", "<<", ">>"]),
    (200, OpType::Xfx, &["**"]),
    (200, OpType::Xfy, &["^"]),
    (200, OpType::Fy, &["-", "+", "\\"]),
];

impl Default for OpTable {
    fn default() -> Self {
        let mut t = OpTable { entries: HashMap::new() };
        for (p, kind, names) in DEFAULT_OPS {
            for n in *names {
                t.update(n, *p as i64, *kind).expect("default operator table is well formed");
            }
        }
        t
    }
}

impl OpTable {
    pub fn empty() -> Self {
        OpTable { entries: HashMap::new() }
    }

    pub fn prefix(&self, name: &str) -> Option<OpDef> {
        self.entries.get(name).and_then(|e| e.prefix)
    }

    pub fn infix(&self, name: &str) -> Option<OpDef> {
        self.entries.get(name).and_then(|e| e.infix)
    }

    pub fn postfix(&self, name: &str) -> Option<OpDef> {
        self.entries.get(name).and_then(|e| e.postfix)
    }

    pub fn is_op(&self, name: &str) -> bool {
        self.entries.get(name).is_some_and(|e| e.prefix.is_some() || e.infix.is_some() || e.postfix.is_some())
    }

    /// Add, change or (priority 0) remove an operator definition.
    pub fn update(&mut self, name: &str, priority: i64, kind: OpType) -> Result<(), OpError> {
        if !(0..=1200).contains(&priority) {
            return Err(OpError::Priority(priority));
        }
        if name == "," {
            return Err(OpError::Comma);
        }
        let entry = self.entries.entry(name.to_string()).or_default();
        let def = (priority > 0).then_some(OpDef { priority: priority as u16, kind });
        match kind.class() {
            OpClass::Prefix => entry.prefix = def,
            OpClass::Infix => {
                if def.is_some() && entry.postfix.is_some() {
                    return Err(OpError::Conflict { name: name.to_string() });
                }
                entry.infix = def;
            }
            OpClass::Postfix => {
                if def.is_some() && entry.infix.is_some() {
                    return Err(OpError::Conflict { name: name.to_string() });
                }
                entry.postfix = def;
            }
        }
        Ok(())
    }

    /// All definitions as (priority, type, name), sorted for stable output.
    pub fn definitions(&self) -> Vec<(u16, OpType, String)> {
        let mut out = Vec::new();
        for (name, e) in &self.entries {
            for d in [e.prefix, e.infix, e.postfix].into_iter().flatten() {
                out.push((d.priority, d.kind, name.clone()));
            }
        }
        out.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.2.cmp(&b.2)).then_with(|| a.1.name().cmp(b.1.name())));
        out
    }
}

impl OpTable {
    /// ',' is fixed and never stored in the table.
    pub fn comma() -> OpDef {
        OpDef { priority: 1000, kind: OpType::Xfy }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_present() {
        let t = OpTable::default();
        assert_eq!(t.infix("#="), Some(OpDef { priority: 700, kind: OpType::Xfx }));
        assert_eq!(t.infix(":-").unwrap().priority, 1200);
        assert_eq!(t.prefix("-").unwrap().kind, OpType::Fy);
    }

    #[test]
    fn out_of_range_priority() {
        let mut t = OpTable::default();
        assert_eq!(t.update("foo", 1300, OpType::Xfx), Err(OpError::Priority(1300)));
        assert_eq!(t.update("foo", -1, OpType::Xfx), Err(OpError::Priority(-1)));
    }

    #[test]
    fn remove_with_zero() {
        let mut t = OpTable::default();
        t.update("#=", 0, OpType::Xfx).unwrap();
        assert!(t.infix("#=").is_none());
    }

    #[test]
    fn infix_postfix_conflict() {
        let mut t = OpTable::default();
        t.update("foo", 200, OpType::Xfx).unwrap();
        assert!(matches!(t.update("foo", 200, OpType::Xf), Err(OpError::Conflict { .. })));
        t.update("foo", 100, OpType::Fy).unwrap();
        assert_eq!(t.prefix("foo").unwrap().priority, 100);
    }
}
