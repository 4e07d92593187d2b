//! Behaviour families and their restriction to final-bit distributions.

use super::env::Environment;
use crate::lang::{link_pair, OracleProgram};
use crate::semantics::{
    enumerate_traces, BitDist, Budget, Event, Executable, ModelError, TraceDist,
};
use rayon::prelude::*;
use std::sync::Arc;
use thiserror::Error;

/// Trace distributions of one program for every (environment, n).
#[derive(Clone, Debug)]
pub struct Behavior {
    pub label: String,
    pub grid: Vec<u32>,
    pub envs: Arc<Vec<Environment>>,
    /// `slices[e][i]` is the distribution under `envs[e]` at `grid[i]`.
    pub slices: Vec<Vec<TraceDist>>,
}

/// `Pr[=1]`, `Pr[=0]` and `Pr[⊥]` at each grid point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryDistFamily {
    pub per_n: Vec<(u32, BitDist)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("unknown environment `{0}`")]
pub struct UnknownEnvironment(pub String);

/// Per-environment trace distributions at one security parameter.
pub fn behav_n(
    exe: &Executable,
    envs: &[Environment],
    n: u32,
    budget: Budget,
) -> Result<Vec<TraceDist>, ModelError> {
    envs.par_iter()
        .map(|z| enumerate_traces(exe, z, n, budget))
        .collect()
}

pub fn behav(
    exe: &Executable,
    envs: Arc<Vec<Environment>>,
    grid: &[u32],
    budget: Budget,
) -> Result<Behavior, ModelError> {
    let pairs: Vec<(usize, u32)> = (0..envs.len())
        .flat_map(|e| grid.iter().map(move |&n| (e, n)))
        .collect();
    let flat: Vec<TraceDist> = pairs
        .par_iter()
        .map(|&(e, n)| enumerate_traces(exe, &envs[e], n, budget))
        .collect::<Result<_, _>>()?;
    let mut it = flat.into_iter();
    let slices = (0..envs.len())
        .map(|_| it.by_ref().take(grid.len()).collect())
        .collect();
    Ok(Behavior {
        label: exe.label.clone(),
        grid: grid.to_vec(),
        envs,
        slices,
    })
}

impl Behavior {
    pub fn env_index(&self, name: &str) -> Result<usize, UnknownEnvironment> {
        self.envs
            .iter()
            .position(|e| e.name == name)
            .ok_or_else(|| UnknownEnvironment(name.to_string()))
    }

    pub fn restrict(&self, env: &str) -> Result<BinaryDistFamily, UnknownEnvironment> {
        Ok(self.restrict_at(self.env_index(env)?))
    }

    pub fn restrict_at(&self, e: usize) -> BinaryDistFamily {
        self.restrict_with(e, &crate::semantics::final_bit)
    }

    pub fn restrict_with(
        &self,
        e: usize,
        beta: &dyn Fn(&[Event]) -> Option<bool>,
    ) -> BinaryDistFamily {
        BinaryDistFamily {
            per_n: self
                .grid
                .iter()
                .zip(&self.slices[e])
                .map(|(&n, d)| (n, d.bits_with(beta)))
                .collect(),
        }
    }
}

/// The final-bit family of `z` run against `ctx` linked with `prg`.
pub fn exec_dist(
    z: &Environment,
    ctx: &OracleProgram,
    prg: &OracleProgram,
    grid: &[u32],
    budget: Budget,
) -> Result<BinaryDistFamily, ModelError> {
    let exe = Executable::new(&link_pair(ctx, prg)?)?;
    let b = behav(&exe, Arc::new(vec![z.clone()]), grid, budget)?;
    Ok(b.restrict_at(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::env::{Action, Node, Obs, View};
    use crate::bits::Bits;
    use crate::lang::{parse_program, WholeProgram};
    use crate::prob;

    #[test]
    fn restriction_of_a_fair_coin() {
        let p = parse_program("let O() := b <- sample(1); return(b).").unwrap();
        let exe = Executable::new(&WholeProgram::single(p.clone())).unwrap();
        let z = Environment::new(
            "z",
            View::Full,
            Node::call(
                Action::new("O", vec![]),
                vec![(Obs::Ret(vec![Bits::new(1, 1)]), Node::Decide(true))],
                Node::Decide(false),
            ),
        );
        let envs = Arc::new(vec![Environment::constant("one", true), z.clone()]);
        let b = behav(&exe, envs, &[1, 2, 3], Budget::Unbounded).unwrap();
        for (_, d) in b.restrict("one").unwrap().per_n {
            assert_eq!(d.one, prob::one());
        }
        for (_, d) in b.restrict("z").unwrap().per_n {
            assert_eq!(d.one, prob::ratio(1, 2));
        }
        assert!(b.restrict("missing").is_err());
        let fam = exec_dist(&z, &OracleProgram::empty(), &p, &[1], Budget::Unbounded).unwrap();
        assert_eq!(fam.per_n[0].1.zero, prob::ratio(1, 2));
    }

    #[test]
    fn empty_environment_list_gives_empty_slice() {
        let p = parse_program("let O() := return(0b1).").unwrap();
        let exe = Executable::new(&WholeProgram::single(p)).unwrap();
        assert!(behav_n(&exe, &[], 1, Budget::Unbounded).unwrap().is_empty());
    }
}
