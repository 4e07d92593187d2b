//! Exact-enumeration workbench for emulation and robust compilation of oracle programs.

pub mod behavior;
pub mod bits;
pub mod casestudies;
pub mod cli;
pub mod emulation;
pub mod equivalence;
pub mod lang;
pub mod primitives;
pub mod prob;
pub mod semantics;
