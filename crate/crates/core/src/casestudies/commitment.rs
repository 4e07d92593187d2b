//! One-bit commitment from a length-quadrupling generator.
//!
//! The real committer sends `prg(s)` or `prg(s) ^ sg` together with `sg`;
//! the simulator sends `prg(s')` for a seed of its own. Distinguishing the
//! two for `b = 1` means telling `U_4n` from `prg(U_n)`.

use super::models::load;
use crate::behavior::{Action, Environment, Node, Obs, View};
use crate::bits::Bits;
use crate::emulation::{EmulationCase, Named};
use crate::equivalence::{CallSpace, EnvClass, EquivKind, EquivSpec};
use crate::primitives::prg;
use crate::semantics::Budget;
use std::sync::Arc;

pub const GRID: [u32; 4] = [1, 2, 3, 4];

/// Steps of either world against two calls are `5n + 7`.
pub fn budget() -> Budget {
    Budget::poly(6, 1, 12)
}

pub fn calls() -> Vec<Action> {
    vec![
        Action::new("Commit", vec![Bits::new(0, 1)]),
        Action::new("Commit", vec![Bits::new(1, 1)]),
        Action::new("Observe", vec![]),
    ]
}

/// Two calls, branching on the first two bits of each response.
pub fn bounded_class() -> EnvClass {
    EnvClass::Bounded {
        depth: 2,
        view: View::Prefix(2),
        calls: CallSpace::Fixed(calls()),
    }
}

pub fn simulator(name: &str) -> Named {
    let file = match name {
        "sim" => "commit_sim.ocl",
        "blind" => "commit_sim_blind.ocl",
        _ => "commit_sim_silent.ocl",
    };
    Named::new(name, load(file))
}

/// The dummy attacker against the committer, with the given simulators.
pub fn case(simulators: &[&str], budgeted: bool) -> EmulationCase {
    let b = if budgeted {
        budget()
    } else {
        Budget::Unbounded
    };
    EmulationCase {
        protocol: Named::new("committer", load("commit_real.ocl")),
        functionality: Named::new("fcom", load("commit_func.ocl")),
        attackers: vec![Named::new("dummy", load("commit_dummy.ocl"))],
        simulators: simulators.iter().map(|s| simulator(s)).collect(),
        real_budget: b,
        ideal_budget: b,
    }
}

pub fn bounded_spec() -> EquivSpec {
    EquivSpec {
        kind: EquivKind::CompProxy { c: 1, big_n: 0 },
        class: bounded_class(),
    }
}

/// Commits to 1, then accepts iff the commitment string is in the image of
/// `prg` at this `n`. Needs the whole string, so the view is `4n` bits.
pub fn image_env(n: u32) -> Environment {
    let mut image: Vec<Bits> = Bits::all(n).map(|s| prg(&s)).collect();
    image.sort();
    image.dedup();
    let observe = Node::call(
        Action::new("Observe", vec![]),
        image
            .into_iter()
            .map(|y| (Obs::Ret(vec![y]), Node::Decide(true)))
            .collect(),
        Node::Decide(false),
    );
    let root = Node::call(
        Action::new("Commit", vec![Bits::new(1, 1)]),
        vec![(Obs::Ret(vec![Bits::new(1, 1)]), observe)],
        Node::Decide(false),
    );
    Environment::new(format!("image-n{n}"), View::Prefix(4 * n), root)
}

pub fn image_spec(grid: &[u32]) -> EquivSpec {
    EquivSpec {
        kind: EquivKind::CompProxy { c: 1, big_n: 0 },
        class: EnvClass::Explicit(Arc::new(grid.iter().map(|&n| image_env(n)).collect())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emulation::verify_emulation;
    use crate::prob;

    #[test]
    fn bundled_simulator_passes_small_grid() {
        let r = verify_emulation(&case(&["sim"], true), &bounded_spec(), &[1, 2], 64).unwrap();
        assert!(r.holds, "{:?}", r.lines());
        let v = r.results[0].verdict.as_ref().unwrap();
        assert_eq!(
            v.profile.curve(),
            vec![(1, prob::ratio(1, 2)), (2, prob::zero())]
        );
    }

    #[test]
    fn silent_simulator_is_caught() {
        let r = verify_emulation(&case(&["silent"], true), &bounded_spec(), &[1], 64).unwrap();
        assert!(!r.holds);
    }

    #[test]
    fn image_env_separates_at_small_n() {
        let r =
            verify_emulation(&case(&["sim"], false), &image_spec(&[1, 2]), &[1, 2], 64).unwrap();
        assert!(!r.holds);
        let v = r.results[0].verdict.as_ref().unwrap();
        assert_eq!(
            v.profile.curve(),
            vec![(1, prob::ratio(7, 8)), (2, prob::ratio(63, 64))]
        );
    }

    #[test]
    fn bundled_image_envs_match() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("models");
        for n in GRID {
            let path = dir.join(format!("commit_image_n{n}.env"));
            let text = image_env(n).to_text();
            if std::env::var_os("UCRC_BLESS").is_some() {
                std::fs::write(&path, &text).unwrap();
            }
            assert_eq!(
                std::fs::read_to_string(&path).unwrap(),
                text,
                "{}",
                path.display()
            );
            assert_eq!(Environment::parse(&text).unwrap(), image_env(n));
        }
    }
}
