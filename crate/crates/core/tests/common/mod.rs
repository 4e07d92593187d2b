#![allow(dead_code)]

pub mod flat;

use ucrc::behavior::{Action, Environment, Node, Obs, View};
use ucrc::casestudies::{models, toy};
use ucrc::equivalence::CallSpace;
use ucrc::lang::{link_pair, WholeProgram};
use ucrc::semantics::{Budget, Executable};

/// A closed bundled model with the environments the checks drive it with.
pub struct World {
    pub id: String,
    pub whole: WholeProgram,
    pub exe: Executable,
    pub budget: Budget,
    pub envs: Vec<Environment>,
}

fn linked(ctx: &str, prg: &str) -> WholeProgram {
    link_pair(&models::load(ctx), &models::load(prg)).unwrap()
}

/// Two-call environments over `actions`: every ordered pair, bailing out on a yield.
pub fn pair_envs(actions: &[Action]) -> Vec<Environment> {
    let mut out = Vec::new();
    for (i, a) in actions.iter().enumerate() {
        out.push(Environment::new(
            format!("one{i}"),
            View::Full,
            Node::call(a.clone(), vec![], Node::Decide(true)),
        ));
        for (j, b) in actions.iter().enumerate() {
            let second = Node::call(
                b.clone(),
                vec![(Obs::Yield, Node::Decide(false))],
                Node::Decide(true),
            );
            out.push(Environment::new(
                format!("pair{i}-{j}"),
                View::Prefix(1),
                Node::call(a.clone(), vec![(Obs::Yield, Node::Decide(false))], second),
            ));
        }
    }
    out
}

/// At most `k` actions spread evenly over `all`.
fn spread(all: Vec<Action>, k: usize) -> Vec<Action> {
    if all.len() <= k {
        return all;
    }
    (0..k)
        .map(|i| all[i * (all.len() - 1) / (k - 1)].clone())
        .collect()
}

/// Every bundled closed model at security parameter `n`.
pub fn worlds(n: u32) -> Vec<World> {
    let mut pairs: Vec<(String, WholeProgram, Budget)> = Vec::new();
    let wg = Budget::poly(8, 1, 40);
    for (c, p) in [
        ("wg_dummy.ocl", "wg_real.ocl"),
        ("wg_sim.ocl", "wg_func.ocl"),
        ("wg_dummy.ocl", "wg_leaky.ocl"),
    ] {
        pairs.push((format!("{c}|{p}"), linked(c, p), wg));
    }
    for g in [
        "wg_g1_elided.ocl",
        "wg_g2_ctxt.ocl",
        "wg_g3_lookup.ocl",
        "wg_g4_cpa.ocl",
        "wg_g5_nokeys.ocl",
        "wg_g6_tags.ocl",
    ] {
        pairs.push((
            g.to_string(),
            WholeProgram::single(models::load(g)),
            Budget::Unbounded,
        ));
    }
    let cb = Budget::poly(6, 1, 12);
    for (c, p) in [
        ("commit_dummy.ocl", "commit_real.ocl"),
        ("commit_sim.ocl", "commit_func.ocl"),
        ("commit_sim_blind.ocl", "commit_func.ocl"),
        ("commit_sim_silent.ocl", "commit_func.ocl"),
    ] {
        pairs.push((format!("{c}|{p}"), linked(c, p), cb));
    }
    let mut out: Vec<World> = pairs
        .into_iter()
        .map(|(id, whole, budget)| {
            let exe = Executable::new(&whole).unwrap();
            let actions = spread(CallSpace::AllArgs.actions(&exe, n, 1 << 16).unwrap(), 5);
            World {
                id,
                envs: pair_envs(&actions),
                whole,
                exe,
                budget,
            }
        })
        .collect();
    let envs = toy::envs();
    for c in toy::CONTEXTS {
        for p in toy::PROGRAMS {
            let whole = linked(&format!("toy/ctx_{c}.ocl"), &format!("toy/prg_{p}.ocl"));
            out.push(World {
                id: format!("toy:{c}|{p}"),
                exe: Executable::new(&whole).unwrap(),
                whole,
                budget: toy::poly_budget(),
                envs: envs.clone(),
            });
        }
    }
    out
}
