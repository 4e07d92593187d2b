//! Exact operational semantics: the interpreter and trace enumeration.

pub mod budget;
pub mod enumerate;
pub mod ir;
pub mod machine;
pub mod trace;

pub use budget::Budget;
pub use enumerate::{
    acceptance, check_predicate, enumerate_paths, enumerate_traces, run, step_count, Executable,
    PathTrace, RunResult, StepReport,
};
pub use ir::{compile, Ir, ModelError};
pub use machine::{Machine, Outcome, State};
pub use trace::{final_bit, format_trace, BitDist, Event, Trace, TraceDist};
