//! The WireGuard record layer: two messages under one key, an adversary
//! who controls delivery, and a game-hop argument checked hop by hop.

use super::models::load;
use crate::behavior::{explore, View};
use crate::bits::Bits;
use crate::emulation::{EmulationCase, EmulationError, Named};
use crate::equivalence::{
    equiv_check, worst_bounded, CallSpace, EnvClass, EquivKind, EquivSpec, Side,
};
use crate::lang::{link_pair, Role, WholeProgram};
use crate::prob::{self, Prob};
use crate::semantics::{Budget, Event, Executable, ModelError, Trace};

pub const GRID: [u32; 3] = [1, 2, 3];
/// Messages the sender may transmit.
pub const N_M: u32 = 2;
pub const MSG_BITS: u32 = 2;
pub const DEPTH: usize = 2;

/// Either world takes at most `2n + 33` steps against two calls.
pub fn budget() -> Budget {
    Budget::poly(8, 1, 40)
}

pub fn class() -> EnvClass {
    EnvClass::Bounded {
        depth: DEPTH,
        view: View::Full,
        calls: CallSpace::AllArgs,
    }
}

pub fn spec(kind: EquivKind) -> EquivSpec {
    EquivSpec {
        kind,
        class: class(),
    }
}

pub fn case() -> EmulationCase {
    EmulationCase {
        protocol: Named::new("record", load("wg_real.ocl")),
        functionality: Named::new("frecord", load("wg_func.ocl")),
        attackers: vec![Named::new("dummy", load("wg_dummy.ocl"))],
        simulators: vec![Named::new("simrecord", load("wg_sim.ocl"))],
        real_budget: budget(),
        ideal_budget: budget(),
    }
}

/// The miscompiled protocol that sends payloads in clear.
pub fn leaky_case() -> EmulationCase {
    EmulationCase {
        protocol: Named::new("leaky", load("wg_leaky.ocl")),
        ..case()
    }
}

/// `n_M · 2^-n`, the bound claimed for the whole argument.
pub fn claimed_bound(n: u32) -> Prob {
    prob::ratio(N_M as i64, 1) * prob::pow2_neg(n)
}

fn wrap(label: &str) -> impl Fn(ModelError) -> EmulationError + '_ {
    move |source| EmulationError::Model {
        pair: label.to_string(),
        source,
    }
}

fn linked(ctx: &str, prg: &str) -> Result<Executable, EmulationError> {
    let label = format!("{ctx}|{prg}");
    let w = link_pair(&load(ctx), &load(prg)).map_err(|e| wrap(&label)(e.into()))?;
    Executable::new(&w).map_err(wrap(&label))
}

fn single(file: &str) -> Result<Executable, EmulationError> {
    Executable::new(&WholeProgram::with_role(Role::Program, load(file))).map_err(wrap(file))
}

pub fn real_world() -> Result<Executable, EmulationError> {
    linked("wg_dummy.ocl", "wg_real.ocl")
}

pub fn ideal_world() -> Result<Executable, EmulationError> {
    linked("wg_sim.ocl", "wg_func.ocl")
}

/// One step of the argument. A perfect hop claims no history tells the games
/// apart; a statistical hop claims the worst advantage is within `bound`.
#[derive(Clone, Debug)]
pub struct Hop {
    pub from: &'static str,
    pub to: &'static str,
    pub reason: &'static str,
    pub perfect: bool,
    pub bound: fn(u32) -> Prob,
    pub bound_text: &'static str,
}

fn perfect(from: &'static str, to: &'static str, reason: &'static str) -> Hop {
    Hop {
        from,
        to,
        reason,
        perfect: true,
        bound: |_| prob::zero(),
        bound_text: "0",
    }
}

/// The game sequence, from the real world to the ideal world. Games compare
/// with response origins erased, since inlining moves oracles between roles.
pub fn game_hops() -> Vec<Hop> {
    vec![
        perfect("real", "g1", "inline the dummy attacker"),
        Hop {
            from: "g1",
            to: "g2",
            reason: "reject records the sender never produced (ciphertext integrity)",
            perfect: false,
            bound: claimed_bound,
            bound_text: "n_M*2^-n",
        },
        perfect(
            "g2",
            "g3",
            "answer from the sender's record instead of decrypting",
        ),
        Hop {
            from: "g3",
            to: "g4",
            reason: "encrypt zeros (confidentiality)",
            perfect: false,
            bound: prob::pow2_neg,
            bound_text: "2^-n",
        },
        perfect("g4", "g5", "each counter draws its pad once"),
        perfect("g5", "g6", "each record draws its tag once"),
        perfect("g6", "ideal", "split into simulator and functionality"),
    ]
}

pub fn game(name: &str) -> Result<Executable, EmulationError> {
    match name {
        "real" => real_world(),
        "ideal" => ideal_world(),
        "g1" => single("wg_g1_elided.ocl"),
        "g2" => single("wg_g2_ctxt.ocl"),
        "g3" => single("wg_g3_lookup.ocl"),
        "g4" => single("wg_g4_cpa.ocl"),
        "g5" => single("wg_g5_nokeys.ocl"),
        "g6" => single("wg_g6_tags.ocl"),
        _ => Err(EmulationError::Unknown {
            kind: "game",
            name: name.to_string(),
        }),
    }
}

#[derive(Clone, Debug)]
pub struct HopResult {
    pub hop: Hop,
    /// Worst advantage per grid point.
    pub measured: Vec<(u32, Prob)>,
    pub bounds: Vec<(u32, Prob)>,
    /// Perfect hops: no history tells the games apart. Others: measured within bound.
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct HopReport {
    pub hops: Vec<HopResult>,
    pub direct: Vec<(u32, Prob)>,
}

impl HopReport {
    pub fn sum_bounds(&self, n: u32) -> Prob {
        self.hops
            .iter()
            .flat_map(|h| {
                h.bounds
                    .iter()
                    .filter(|(m, _)| *m == n)
                    .map(|(_, p)| p.clone())
            })
            .fold(prob::zero(), |a, b| a + b)
    }

    pub fn sum_measured(&self, n: u32) -> Prob {
        self.hops
            .iter()
            .flat_map(|h| {
                h.measured
                    .iter()
                    .filter(|(m, _)| *m == n)
                    .map(|(_, p)| p.clone())
            })
            .fold(prob::zero(), |a, b| a + b)
    }

    /// Every hop holds and the direct advantage is within the sum of hop bounds.
    pub fn consistent(&self) -> bool {
        self.hops.iter().all(|h| h.holds)
            && self.direct.iter().all(|(n, d)| {
                *d <= self.sum_measured(*n) && self.sum_measured(*n) <= self.sum_bounds(*n)
            })
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .hops
            .iter()
            .map(|h| {
                let curve: Vec<String> = h
                    .measured
                    .iter()
                    .zip(&h.bounds)
                    .map(|((n, m), (_, b))| {
                        format!("n={n}:{}<={}", prob::format(m), prob::format(b))
                    })
                    .collect();
                format!(
                    "check=hop:{}->{} status={} detail=relation={} reason=\"{}\" {}",
                    h.hop.from,
                    h.hop.to,
                    if h.holds { "pass" } else { "fail" },
                    if h.hop.perfect {
                        "perfect".to_string()
                    } else {
                        format!("stat:{}", h.hop.bound_text)
                    },
                    h.hop.reason,
                    curve.join(" ")
                )
            })
            .collect();
        let sums: Vec<String> = self
            .direct
            .iter()
            .map(|(n, d)| {
                format!(
                    "n={n}:{}<={}<={}",
                    prob::format(d),
                    prob::format(&self.sum_measured(*n)),
                    prob::format(&self.sum_bounds(*n))
                )
            })
            .collect();
        out.push(format!(
            "check=hop-sum status={} detail=direct<=measured<=bounds {}",
            if self.consistent() { "pass" } else { "fail" },
            sums.join(" ")
        ));
        out
    }
}

/// Measures every hop and the direct real-to-ideal distance over the bounded class.
pub fn check_game_hops(grid: &[u32], ceiling: u128) -> Result<HopReport, EmulationError> {
    let unb = Budget::Unbounded;
    let mut hops = Vec::new();
    for h in game_hops() {
        let (a, b) = (game(h.from)?, game(h.to)?);
        let (l, r) = (
            Side {
                exe: &a,
                budget: unb,
            },
            Side {
                exe: &b,
                budget: unb,
            },
        );
        let mut measured = Vec::new();
        for &n in grid {
            let (_, x, y) =
                worst_bounded(l, r, DEPTH, View::Full, &CallSpace::AllArgs, n, ceiling)?;
            measured.push((n, prob::abs(&(x - y))));
        }
        let bounds: Vec<(u32, Prob)> = grid.iter().map(|&n| (n, (h.bound)(n))).collect();
        let holds = if h.perfect {
            equiv_check(l, r, &spec(EquivKind::Perfect), grid, ceiling)?.holds
        } else {
            measured.iter().zip(&bounds).all(|((_, m), (_, b))| m <= b)
        };
        hops.push(HopResult {
            hop: h,
            measured,
            bounds,
            holds,
        });
    }
    let (a, b) = (real_world()?, ideal_world()?);
    let mut direct = Vec::new();
    for &n in grid {
        let (_, x, y) = worst_bounded(
            Side {
                exe: &a,
                budget: unb,
            },
            Side {
                exe: &b,
                budget: unb,
            },
            DEPTH,
            View::Full,
            &CallSpace::AllArgs,
            n,
            ceiling,
        )?;
        direct.push((n, prob::abs(&(x - y))));
    }
    Ok(HopReport { hops, direct })
}

/// Counters of accepted deliveries and of sent records in one history.
fn replay_ok(h: &[Event]) -> bool {
    let mut delivered: Vec<Bits> = Vec::new();
    let mut sent: Vec<Bits> = Vec::new();
    for w in h.chunks(2) {
        let (Event::Call { oracle, args }, Some(Event::Return { values, .. })) = (&w[0], w.get(1))
        else {
            continue;
        };
        let ctr = match &**oracle {
            "Oe2aR" => args[0],
            "Oe2S" => values[0],
            _ => continue,
        };
        let seen = if &**oracle == "Oe2aR" {
            &mut delivered
        } else {
            &mut sent
        };
        if seen.contains(&ctr) {
            return false;
        }
        seen.push(ctr);
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayReport {
    pub histories: usize,
    pub violation: Option<Trace>,
}

/// No counter is delivered twice and no counter is sent twice, in any
/// history of up to `depth` calls with arbitrary arguments.
pub fn replay_invariant(
    exe: &Executable,
    grid: &[u32],
    depth: usize,
    ceiling: u128,
) -> Result<ReplayReport, EmulationError> {
    let mut histories = 0;
    for &n in grid {
        let actions = CallSpace::AllArgs.actions(exe, n, ceiling)?;
        let r = explore(
            exe,
            n,
            Budget::Unbounded,
            depth,
            View::Full,
            &actions,
            &mut |h, _| replay_ok(h),
        )
        .map_err(wrap(&exe.label))?;
        histories += r.histories;
        if r.violation.is_some() {
            return Ok(ReplayReport {
                histories,
                violation: r.violation,
            });
        }
    }
    Ok(ReplayReport {
        histories,
        violation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emulation::verify_emulation;

    #[test]
    fn emulation_holds_at_n1() {
        let r = verify_emulation(
            &case(),
            &spec(EquivKind::CompProxy { c: 1, big_n: 0 }),
            &[1],
            1024,
        )
        .unwrap();
        assert!(r.holds, "{:?}", r.lines());
        assert_eq!(
            r.results[0].verdict.as_ref().unwrap().profile.curve(),
            vec![(1, prob::ratio(3, 4))]
        );
    }

    #[test]
    fn leaky_protocol_fails() {
        let r = verify_emulation(
            &leaky_case(),
            &spec(EquivKind::CompProxy { c: 1, big_n: 0 }),
            &[1, 2],
            1024,
        )
        .unwrap();
        assert!(!r.holds);
        // both payloads are visible; in the ideal world each matches with chance 1/4
        let c = r.results[0]
            .verdict
            .as_ref()
            .unwrap()
            .counterexample
            .clone()
            .unwrap();
        assert_eq!((c.n, c.advantage()), (2, prob::ratio(15, 16)));
    }

    #[test]
    fn hops_at_n1() {
        let r = check_game_hops(&[1], 1024).unwrap();
        for l in r.lines() {
            eprintln!("{l}");
        }
        assert!(r.consistent());
    }

    #[test]
    fn replay_invariant_at_n1() {
        let r = replay_invariant(&real_world().unwrap(), &[1], 3, 1024).unwrap();
        assert_eq!(r.violation, None);
        assert!(r.histories > 0);
    }
}
