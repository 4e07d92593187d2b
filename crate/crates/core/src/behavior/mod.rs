//! Environments, behaviours and the axioms relating them.

pub mod axioms;
pub mod behav;
pub mod canonical;
pub mod env;
pub mod explore;

pub use axioms::{axiom_suite, AxiomConfig, AxiomLine, AxiomModel, AxiomReport};
pub use behav::{behav, behav_n, exec_dist, Behavior, BinaryDistFamily, UnknownEnvironment};
pub use canonical::{accepted, canonical_env, prefix_mass, MalformedPrefix, TracePrefix};
pub use env::{Action, EnvAlphabet, Environment, Node, Obs, SpaceTooLarge, View};
pub use explore::{explore, ExploreReport};
