//! Driving a closed program with an environment and collecting every trace.

use super::budget::Budget;
use super::ir::{compile, Ir, ModelError};
use super::machine::{Machine, Outcome, State};
use super::trace::{Event, Trace, TraceDist};
use crate::behavior::env::{Environment, Node, View};
use crate::lang::WholeProgram;
use crate::prob::Dyadic;
use rustc_hash::FxHashMap;
use std::sync::Arc;

/// A compiled closed program.
#[derive(Clone, Debug)]
pub struct Executable {
    pub label: String,
    pub ir: Arc<Ir>,
}

impl Executable {
    pub fn new(w: &WholeProgram) -> Result<Self, ModelError> {
        Ok(Executable {
            label: w.label(),
            ir: Arc::new(compile(w)?),
        })
    }

    pub fn machine(&self, n: u32, budget: Budget) -> Machine {
        Machine::new(self.ir.clone(), n, budget)
    }

    /// Exported oracle names, in export order.
    pub fn exports(&self) -> Vec<String> {
        self.ir.exports.iter().map(|(n, _)| n.to_string()).collect()
    }
}

/// One execution path with the number of tape bits it consumed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathTrace {
    pub trace: Trace,
    pub weight: Dyadic,
    pub sampled: u32,
}

/// Trace distribution of one run, the longest path in steps, and the
/// environment's decisions tallied where they are made.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub dist: TraceDist,
    pub max_steps: u64,
    pub decided_one: Dyadic,
    pub decided_zero: Dyadic,
}

struct Item {
    st: State,
    w: Dyadic,
    sampled: u32,
}

struct Sink {
    dist: TraceDist,
    record: bool,
    paths: Option<Vec<PathTrace>>,
    max_steps: u64,
    decided: [Dyadic; 2],
}

impl Sink {
    fn finish(&mut self, trace: &Trace, it: Item, decision: Option<bool>) {
        self.max_steps = self.max_steps.max(it.st.steps);
        if let Some(b) = decision {
            self.decided[b as usize] = self.decided[b as usize].add(it.w);
        }
        if let Some(p) = &mut self.paths {
            p.push(PathTrace {
                trace: trace.clone(),
                weight: it.w,
                sampled: it.sampled,
            });
        }
        if self.record {
            self.dist.add(trace.clone(), it.w);
        }
    }
}

fn merge_items(items: Vec<Item>) -> Vec<Item> {
    if items.len() < 2 {
        return items;
    }
    let mut index: FxHashMap<State, usize> = FxHashMap::default();
    let mut out: Vec<Item> = Vec::new();
    for it in items {
        match index.get(&it.st) {
            Some(&i) => out[i].w = out[i].w.add(it.w),
            None => {
                index.insert(it.st.clone(), out.len());
                out.push(it);
            }
        }
    }
    out
}

fn walk(
    m: &Machine,
    view: View,
    node: &Node,
    items: Vec<Item>,
    trace: &mut Trace,
    merge: bool,
    sink: &mut Sink,
) -> Result<(), ModelError> {
    match node {
        Node::Decide(b) => {
            trace.push(Event::Decide(*b));
            for it in items {
                sink.finish(trace, it, Some(*b));
            }
            trace.pop();
        }
        Node::Call { action, .. } => {
            let origin = m
                .origin(&action.oracle)
                .ok_or_else(|| ModelError::NotExported(action.oracle.to_string()))?;
            trace.push(Event::Call {
                oracle: action.oracle.clone(),
                args: action.args.clone(),
            });
            let mut groups: Vec<(Outcome, Vec<Item>)> = Vec::new();
            let mut index: FxHashMap<Outcome, usize> = FxHashMap::default();
            for it in items {
                for b in m.call(&it.st, &action.oracle, &action.args)? {
                    let item = Item {
                        st: b.state,
                        w: it.w.mul(b.weight),
                        sampled: it.sampled + b.sampled,
                    };
                    let i = *index.entry(b.outcome.clone()).or_insert_with(|| {
                        groups.push((b.outcome, Vec::new()));
                        groups.len() - 1
                    });
                    groups[i].1.push(item);
                }
            }
            for (outcome, group) in groups {
                let group = if merge { merge_items(group) } else { group };
                match view.observe(&outcome) {
                    None => {
                        trace.push(Event::Timeout);
                        for it in group {
                            sink.finish(trace, it, None);
                        }
                        trace.pop();
                    }
                    Some(obs) => {
                        trace.push(match outcome {
                            Outcome::Return(values) => Event::Return { origin, values },
                            _ => Event::Yield { origin },
                        });
                        let child = node.child(&obs).expect("call node has children");
                        walk(m, view, child, group, trace, merge, sink)?;
                        trace.pop();
                    }
                }
            }
            trace.pop();
        }
    }
    Ok(())
}

fn drive(
    exe: &Executable,
    env: &Environment,
    n: u32,
    budget: Budget,
    merge: bool,
    paths: bool,
    record: bool,
) -> Result<Sink, ModelError> {
    let m = exe.machine(n, budget);
    let mut sink = Sink {
        dist: TraceDist::new(n),
        record,
        paths: paths.then(Vec::new),
        max_steps: 0,
        decided: [Dyadic::ZERO; 2],
    };
    let mut live = Vec::new();
    let mut trace = Vec::new();
    for b in m.initial()? {
        let it = Item {
            st: b.state,
            w: b.weight,
            sampled: b.sampled,
        };
        if b.outcome == Outcome::Timeout {
            sink.finish(&vec![Event::Timeout], it, None);
        } else {
            live.push(it);
        }
    }
    let live = if merge { merge_items(live) } else { live };
    walk(&m, env.view, &env.root, live, &mut trace, merge, &mut sink)?;
    Ok(sink)
}

/// Exact distribution over complete traces of `exe` driven by `env`.
pub fn enumerate_traces(
    exe: &Executable,
    env: &Environment,
    n: u32,
    budget: Budget,
) -> Result<TraceDist, ModelError> {
    Ok(drive(exe, env, n, budget, true, false, true)?.dist)
}

pub fn run(
    exe: &Executable,
    env: &Environment,
    n: u32,
    budget: Budget,
) -> Result<RunResult, ModelError> {
    let s = drive(exe, env, n, budget, true, false, true)?;
    Ok(RunResult {
        dist: s.dist,
        max_steps: s.max_steps,
        decided_one: s.decided[1],
        decided_zero: s.decided[0],
    })
}

/// Probabilities that `env` decides 1 and 0, without keeping traces.
pub fn acceptance(
    exe: &Executable,
    env: &Environment,
    n: u32,
    budget: Budget,
) -> Result<(Dyadic, Dyadic), ModelError> {
    let s = drive(exe, env, n, budget, true, false, false)?;
    Ok((s.decided[1], s.decided[0]))
}

/// Every tape path separately, without merging equal states.
pub fn enumerate_paths(
    exe: &Executable,
    env: &Environment,
    n: u32,
    budget: Budget,
) -> Result<Vec<PathTrace>, ModelError> {
    Ok(drive(exe, env, n, budget, false, true, true)?
        .paths
        .unwrap_or_default())
}

/// Longest path of a program at one security parameter over a set of environments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepReport {
    pub n: u32,
    pub max_steps: u64,
    pub limit: Option<u64>,
}

impl StepReport {
    pub fn within(&self) -> bool {
        self.limit.is_none_or(|l| self.max_steps <= l)
    }
}

pub fn step_count(
    exe: &Executable,
    envs: &[Environment],
    grid: &[u32],
    budget: Budget,
) -> Result<Vec<StepReport>, ModelError> {
    grid.iter()
        .map(|&n| {
            let mut max = 0;
            for e in envs {
                max = max.max(run(exe, e, n, Budget::Unbounded)?.max_steps);
            }
            Ok(StepReport {
                n,
                max_steps: max,
                limit: budget.limit(n),
            })
        })
        .collect()
}

/// Whether no execution path against any of `envs` exceeds the budget on the grid.
pub fn check_predicate(
    exe: &Executable,
    envs: &[Environment],
    grid: &[u32],
    budget: Budget,
) -> Result<bool, ModelError> {
    Ok(step_count(exe, envs, grid, budget)?
        .iter()
        .all(StepReport::within))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::env::{Action, Obs};
    use crate::bits::Bits;
    use crate::lang::parse_program;

    fn exe(src: &str) -> Executable {
        let p = parse_program(src).unwrap();
        Executable::new(&WholeProgram::single(p)).unwrap()
    }

    fn call_then_decide(o: &str) -> Environment {
        Environment::new(
            "e",
            View::Full,
            Node::call(
                Action::new(o, vec![]),
                vec![(Obs::Ret(vec![Bits::new(1, 1)]), Node::Decide(true))],
                Node::Decide(false),
            ),
        )
    }

    #[test]
    fn fair_coin_gives_two_traces() {
        let e = exe("let O() := b <- sample(1); return(b).");
        let d = enumerate_traces(&e, &call_then_decide("O"), 1, Budget::Unbounded).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.total(), Dyadic::ONE);
        assert_eq!(d.bits().one, crate::prob::ratio(1, 2));
        let paths = enumerate_paths(&e, &call_then_decide("O"), 1, Budget::Unbounded).unwrap();
        assert!(paths
            .iter()
            .all(|p| p.weight == Dyadic::pow2_neg(p.sampled)));
    }

    #[test]
    fn states_merge_when_samples_are_forgotten() {
        let e = exe("let O() := b <- sample(n); return(0b1).");
        let d = enumerate_traces(&e, &call_then_decide("O"), 3, Budget::Unbounded).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(
            enumerate_paths(&e, &call_then_decide("O"), 3, Budget::Unbounded)
                .unwrap()
                .len(),
            8
        );
    }

    #[test]
    fn budget_turns_long_paths_into_timeouts() {
        let e = exe("let O() := find j <= 8 suchthat 0b0 then return(0b1) else return(0b0).");
        let env = call_then_decide("O");
        let r = run(&e, &env, 1, Budget::Unbounded).unwrap();
        // find: 1 + 8 candidates, then return
        assert_eq!(r.max_steps, 10);
        let d = enumerate_traces(&e, &env, 1, Budget::poly(0, 0, 5)).unwrap();
        assert_eq!(
            crate::semantics::format_trace(d.entries.keys().next().unwrap()),
            "env:call:O();env:timeout"
        );
        assert!(!check_predicate(&e, &[env.clone()], &[1], Budget::poly(0, 0, 5)).unwrap());
        assert!(check_predicate(&e, &[env], &[1], Budget::poly(0, 0, 10)).unwrap());
    }

    #[test]
    fn non_replicated_oracle_is_refused_the_second_time() {
        let e = exe("let O() := return(0b1).");
        let env = Environment::new(
            "e",
            View::Full,
            Node::call(
                Action::new("O", vec![]),
                vec![],
                Node::call(
                    Action::new("O", vec![]),
                    vec![(Obs::Yield, Node::Decide(true))],
                    Node::Decide(false),
                ),
            ),
        );
        let d = enumerate_traces(&e, &env, 1, Budget::Unbounded).unwrap();
        assert_eq!(d.bits().one, crate::prob::one());
    }

    #[test]
    fn replicated_instances_keep_separate_state() {
        let src = "reads O.x. foreach i <= 2 do ( let O() := x <- sample(1); return(x) | let P() := find j <= 2 suchthat defined(x[j]) then return(0b1) else return(0b0) ).";
        let e = exe(src);
        let env = Environment::new(
            "e",
            View::Full,
            Node::call(
                Action::new("P", vec![]),
                vec![(Obs::Ret(vec![Bits::new(0, 1)]), Node::Decide(true))],
                Node::Decide(false),
            ),
        );
        let d = enumerate_traces(&e, &env, 1, Budget::Unbounded).unwrap();
        assert_eq!(d.bits().one, crate::prob::one());
    }

    #[test]
    fn recursive_run_is_rejected() {
        let p = parse_program("let O() := run P(). let P() := run O().").unwrap();
        assert!(matches!(
            Executable::new(&WholeProgram::single(p)),
            Err(ModelError::RecursiveRun(_))
        ));
    }
}
