#![allow(dead_code)]

pub mod bench;
pub mod corpus;
pub mod fdcheck;
pub mod golden;
pub mod linkcheck;
pub mod oracle;

use gpl_core::vm::{Limits, Machine};

pub fn machine() -> Machine {
    let mut m = Machine::new(Limits::default());
    m.out = Box::new(std::io::sink());
    m.err = Box::new(std::io::sink());
    m
}

/// Solutions of a goal as `Name=Value` lists joined by commas.
pub fn sols(m: &mut Machine, g: &str) -> Vec<String> {
    m.solve_all(g, 100_000)
        .unwrap_or_else(|e| panic!("{g}: {e}"))
        .into_iter()
        .map(|b| b.iter().map(|(n, v)| format!("{n}={v}")).collect::<Vec<_>>().join(","))
        .collect()
}
