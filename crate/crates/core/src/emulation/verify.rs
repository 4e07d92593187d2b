//! Checking that a protocol emulates a functionality.

use super::universe::{EmulationError, Named};
use crate::behavior::explore;
use crate::equivalence::{equiv_check, EnvClass, EquivSpec, Side, Verdict};
use crate::lang::link_pair;
use crate::prob::{self, Prob};
use crate::semantics::{check_predicate, Budget, Executable, ModelError};

/// A protocol with its attackers and a functionality with its simulators.
#[derive(Clone, Debug)]
pub struct EmulationCase {
    pub protocol: Named,
    pub functionality: Named,
    pub attackers: Vec<Named>,
    pub simulators: Vec<Named>,
    pub real_budget: Budget,
    pub ideal_budget: Budget,
}

#[derive(Clone, Debug)]
pub struct AttackerResult {
    pub attacker: String,
    /// The first simulator that matched, or the closest one when none did.
    pub simulator: Option<String>,
    pub verdict: Option<Verdict>,
    /// Whether the attacker respected the real-world budget.
    pub admissible: bool,
}

#[derive(Clone, Debug)]
pub struct EmulationReport {
    pub holds: bool,
    pub results: Vec<AttackerResult>,
    /// Simulators excluded for exceeding the ideal-world budget.
    pub inadmissible_simulators: Vec<String>,
}

impl EmulationReport {
    /// Verdict lines, one per attacker.
    pub fn lines(&self) -> Vec<String> {
        self.results
            .iter()
            .map(|r| {
                let status = if !r.admissible || r.verdict.as_ref().is_some_and(|v| v.holds) {
                    "pass"
                } else {
                    "fail"
                };
                let detail = match (&r.verdict, r.admissible) {
                    (_, false) => "attacker exceeds the real-world budget; excluded".to_string(),
                    (None, true) => "no admissible simulator".to_string(),
                    (Some(v), true) => format!(
                        "simulator={} {}",
                        r.simulator.as_deref().unwrap_or("-"),
                        v.detail()
                    ),
                };
                format!(
                    "check=emulate:{} status={status} detail={detail}",
                    r.attacker
                )
            })
            .collect()
    }
}

fn link(ctx: &Named, prg: &Named) -> Result<Executable, EmulationError> {
    let wrap = |source: ModelError| EmulationError::Model {
        pair: format!("{}|{}", ctx.name, prg.name),
        source,
    };
    let w = link_pair(&ctx.program, &prg.program).map_err(|e| wrap(e.into()))?;
    Executable::new(&w).map_err(wrap)
}

/// Whether no run of `exe` against the class exceeds `budget` on the grid.
pub fn within_budget(
    exe: &Executable,
    class: &EnvClass,
    grid: &[u32],
    budget: Budget,
    ceiling: u128,
) -> Result<bool, EmulationError> {
    if budget == Budget::Unbounded {
        return Ok(true);
    }
    match class {
        EnvClass::Explicit(envs) => {
            check_predicate(exe, envs, grid, budget).map_err(|source| EmulationError::Model {
                pair: exe.label.clone(),
                source,
            })
        }
        EnvClass::Bounded { depth, view, calls } => {
            for &n in grid {
                let actions = calls.actions(exe, n, ceiling)?;
                let r = explore(
                    exe,
                    n,
                    Budget::Unbounded,
                    *depth,
                    *view,
                    &actions,
                    &mut |_, _| true,
                )
                .map_err(|source| EmulationError::Model {
                    pair: exe.label.clone(),
                    source,
                })?;
                if !budget.allows(n, r.max_steps) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

fn worst(v: &Verdict) -> Prob {
    v.profile
        .curve()
        .into_iter()
        .map(|(_, p)| p)
        .max()
        .unwrap_or_else(prob::zero)
}

/// For every admissible attacker, looks for an admissible simulator whose
/// ideal world is related to the attacker's real world under `spec`.
pub fn verify_emulation(
    case: &EmulationCase,
    spec: &EquivSpec,
    grid: &[u32],
    ceiling: u128,
) -> Result<EmulationReport, EmulationError> {
    // refuse oversized call spaces before any search starts
    if let EnvClass::Bounded { calls, .. } = &spec.class {
        if let Some(a) = case.attackers.first() {
            let exe = link(a, &case.protocol)?;
            for &n in grid {
                calls.actions(&exe, n, ceiling)?;
            }
        }
    }
    let mut ideals = Vec::new();
    let mut inadmissible_simulators = Vec::new();
    for s in &case.simulators {
        let exe = link(s, &case.functionality)?;
        if within_budget(&exe, &spec.class, grid, case.ideal_budget, ceiling)? {
            ideals.push((s.name.clone(), exe));
        } else {
            inadmissible_simulators.push(s.name.clone());
        }
    }
    let mut results = Vec::new();
    for a in &case.attackers {
        let real = link(a, &case.protocol)?;
        if !within_budget(&real, &spec.class, grid, case.real_budget, ceiling)? {
            results.push(AttackerResult {
                attacker: a.name.clone(),
                simulator: None,
                verdict: None,
                admissible: false,
            });
            continue;
        }
        let mut best: Option<(String, Verdict)> = None;
        for (name, ideal) in &ideals {
            let v = equiv_check(
                Side {
                    exe: &real,
                    budget: case.real_budget,
                },
                Side {
                    exe: ideal,
                    budget: case.ideal_budget,
                },
                spec,
                grid,
                ceiling,
            )?;
            let better = match &best {
                None => true,
                Some((_, b)) => !b.holds && (v.holds || worst(&v) < worst(b)),
            };
            if better {
                best = Some((name.clone(), v));
            }
            if best.as_ref().is_some_and(|(_, b)| b.holds) {
                break;
            }
        }
        let (simulator, verdict) = match best {
            Some((s, v)) => (Some(s), Some(v)),
            None => (None, None),
        };
        results.push(AttackerResult {
            attacker: a.name.clone(),
            simulator,
            verdict,
            admissible: true,
        });
    }
    let holds = results
        .iter()
        .all(|r| !r.admissible || r.verdict.as_ref().is_some_and(|v| v.holds));
    Ok(EmulationReport {
        holds,
        results,
        inadmissible_simulators,
    })
}
