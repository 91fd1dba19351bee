//! Finite-domain constraints: the definition language, its compiler and the
//! propagation engine.

pub mod engine;
pub mod lang;
pub mod range;
pub mod spec;

pub use engine::{ArgVal, Chain, FrameInfo, Registry, Stats, Store, Undo, LIB_FD};
pub use lang::{parse_fd, ConstraintDef, FdSyntaxError, PType};
pub use range::{Range, MAX_INTEGER};
pub use spec::{compile_def, ExtVal, Externals, FdCompileError, Spec, Trig};
