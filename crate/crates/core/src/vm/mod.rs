//! The Mini-Assembly virtual machine: loader, linker, instruction loop and
//! built-in predicates.

mod arith;
mod builtins;
pub mod code;
mod fdlib;
mod io;
pub mod loader;
pub mod machine;
mod prims;
pub mod runtime;
mod terms;
mod terms_blt;
pub mod toplevel;
pub mod word;

pub use loader::{link, LinkedImage, Library, LoadError, LoadMode};
pub use machine::{Flags, Limits, Machine, PlError, Res};
pub use runtime::{compile_to_ma, runtime_symbols, system_objects, ConsultError};
pub use word::{STerm, Word};
pub use toplevel::{Query, QueryError};
