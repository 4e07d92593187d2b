//! The relations ≡ between behaviours.

pub mod check;
pub mod laws;
pub mod profile;
pub mod spec;

pub use check::{
    compare_behaviors, equiv_check, evaluate, explicit, worst_bounded, Side, DEFAULT_CALL_CEILING,
};
pub use laws::{preorder_laws, LawReport};
pub use profile::{binary_diff, Counterexample, DiffEntry, DiffProfile, EquivError, Verdict};
pub use spec::{BadSpec, CallSpace, EnvClass, EquivKind, EquivSpec, Schedule, SpaceError};
