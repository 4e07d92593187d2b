//! UC emulation over finite universes and the compiler criteria built on it.

pub mod theorems;
pub mod universe;
pub mod verify;

pub use theorems::{
    check_pred_rhc, check_pred_rhp, cross_check_theorems, emul_set_membership, emul_source,
    emul_target, hyp_membership, Compiler, Failure, TheoremLine,
};
pub use universe::{Ceilings, EmulationError, Evaluator, Lang, Named, Pair, Universe};
pub use verify::{verify_emulation, within_budget, AttackerResult, EmulationCase, EmulationReport};
