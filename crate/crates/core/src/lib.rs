//! A small Prolog system: reader, WAM compiler, mini-assembly translator,
//! virtual machine and finite-domain constraint solver.

pub mod fd;
pub mod ma;
pub mod pl2wam;
pub mod reader;
pub mod term;
pub mod wam2ma;
pub mod vm;
