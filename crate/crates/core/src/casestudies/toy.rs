//! A universe small enough to decide every criterion exhaustively: four
//! programs sharing one secret bit, five contexts, depth-2 environments.

use super::models::load;
use crate::behavior::{Action, EnvAlphabet, Environment, Obs};
use crate::bits::Bits;
use crate::emulation::{Named, Universe};
use crate::semantics::Budget;
use std::sync::Arc;

pub const PROGRAMS: [&str; 4] = ["zero", "one", "coin", "notcoin"];
pub const CONTEXTS: [&str; 5] = ["silent", "one", "leak", "leakneg", "heavy"];
pub const GRID: [u32; 2] = [1, 2];
pub const ENV_DEPTH: usize = 2;

/// Affords every context except the exhaustive search.
pub fn poly_budget() -> Budget {
    Budget::poly(4, 1, 16)
}

pub fn alphabet() -> EnvAlphabet {
    EnvAlphabet {
        calls: vec![Action::new("Out", vec![]), Action::new("Adv", vec![])],
        responses: vec![
            Obs::Ret(vec![Bits::new(0, 1)]),
            Obs::Ret(vec![Bits::new(1, 1)]),
        ],
    }
}

pub fn envs() -> Vec<Environment> {
    alphabet()
        .enumerate(ENV_DEPTH, 10_000)
        .expect("toy alphabet is small")
}

pub fn programs() -> Vec<Named> {
    PROGRAMS
        .iter()
        .map(|p| Named::new(*p, load(&format!("toy/prg_{p}.ocl"))))
        .collect()
}

pub fn contexts() -> Vec<Named> {
    CONTEXTS
        .iter()
        .map(|c| Named::new(*c, load(&format!("toy/ctx_{c}.ocl"))))
        .collect()
}

/// Source and target languages coincide; only the budgets are chosen.
pub fn universe(budget: Budget) -> Universe {
    Universe {
        source_programs: programs(),
        target_programs: programs(),
        source_contexts: contexts(),
        target_contexts: contexts(),
        envs: Arc::new(envs()),
        grid: GRID.to_vec(),
        source_budget: budget,
        target_budget: budget,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emulation::{cross_check_theorems, Ceilings, Compiler, Evaluator, Lang};
    use crate::equivalence::EquivKind;

    #[test]
    fn only_heavy_exceeds_the_budget() {
        let ev = Evaluator::new(universe(poly_budget()), &Ceilings::default()).unwrap();
        assert_eq!(ev.universe.envs.len(), 202);
        for c in 0..CONTEXTS.len() {
            for p in 0..PROGRAMS.len() {
                assert_eq!(
                    ev.admissible((Lang::Source, c, p)),
                    CONTEXTS[c] != "heavy",
                    "{c} {p}"
                );
            }
        }
    }

    #[test]
    fn theorems_agree() {
        let ev = Evaluator::new(universe(poly_budget()), &Ceilings::default()).unwrap();
        let cms = Compiler::all(4, 4, &Ceilings::default()).unwrap();
        for k in ["perfect", "stat:1/4", "comp:c=1,N=0"] {
            let line = cross_check_theorems(&ev, &cms, &EquivKind::parse(k).unwrap()).unwrap();
            eprintln!("{line}");
            assert_eq!(line.rhc_rhp_disagreements, 0);
            assert_eq!(line.lemma_disagreements, 0);
        }
    }
}
