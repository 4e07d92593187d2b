mod common;

use common::{flat, worlds};
use ucrc::semantics::{enumerate_paths, enumerate_traces};

#[test]
fn interpreter_matches_tape_counting() {
    for n in [1, 2] {
        let t = std::time::Instant::now();
        for w in worlds(n) {
            let mut bits = 0;
            for env in &w.envs {
                for budget in [ucrc::semantics::Budget::Unbounded, w.budget] {
                    let oracle = flat::enumerate(&w.whole, env, n, budget, 22);
                    bits = bits.max(oracle.tape_bits);
                    let got = enumerate_traces(&w.exe, env, n, budget).unwrap();
                    let got: std::collections::BTreeMap<_, _> = got
                        .entries
                        .iter()
                        .map(|(t, p)| (t.clone(), p.to_ratio()))
                        .collect();
                    assert_eq!(got, oracle.dist(), "{} env {} n={n}", w.id, env.name);
                    let paths = enumerate_paths(&w.exe, env, n, budget).unwrap();
                    let tapes: u64 = paths
                        .iter()
                        .map(|p| 1u64 << (oracle.tape_bits - p.sampled))
                        .sum();
                    assert_eq!(tapes, oracle.tapes(), "{} env {}", w.id, env.name);
                }
            }
            eprintln!("n={n} {} envs={} bits={bits}", w.id, w.envs.len());
        }
        eprintln!("n={n} {:?}", t.elapsed());
    }
}
