//! Every history a bounded environment can provoke.

use super::env::{Action, Obs, View};
use crate::prob::Dyadic;
use crate::semantics::{Budget, Event, Executable, Machine, ModelError, Outcome, State, Trace};
use rustc_hash::FxHashMap;
use std::collections::BTreeMap;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExploreReport {
    /// Histories with positive mass that were visited.
    pub histories: usize,
    /// Longest path in steps over all of them.
    pub max_steps: u64,
    /// The first history the visitor rejected.
    pub violation: Option<Trace>,
}

type Group = Vec<(State, Dyadic)>;

/// Branches grouped by what the environment sees, equal states merged.
#[derive(Default)]
struct Merged {
    index: FxHashMap<State, usize>,
    group: Group,
}

impl Merged {
    fn add(&mut self, s: State, w: Dyadic) {
        match self.index.get(&s) {
            Some(&i) => self.group[i].1 = self.group[i].1.add(w),
            None => {
                self.index.insert(s.clone(), self.group.len());
                self.group.push((s, w));
            }
        }
    }
}

/// Returns first, then yields, then timeouts.
fn outcome_order(o: Option<Obs>) -> (u8, Option<Obs>) {
    (o.is_none() as u8, o)
}

struct Walk<'a> {
    m: Machine,
    actions: &'a [Action],
    view: View,
    report: ExploreReport,
}

impl Walk<'_> {
    fn go(
        &mut self,
        g: &Group,
        depth: usize,
        history: &mut Trace,
        visit: &mut dyn FnMut(&[Event], Dyadic) -> bool,
    ) -> Result<bool, ModelError> {
        if depth == 0 {
            return Ok(true);
        }
        for a in self.actions {
            let origin = self
                .m
                .origin(&a.oracle)
                .ok_or_else(|| ModelError::NotExported(a.oracle.to_string()))?;
            let mut by: BTreeMap<(u8, Option<Obs>), Merged> = BTreeMap::new();
            for (s, w) in g {
                for b in self.m.call(s, &a.oracle, &a.args)? {
                    self.report.max_steps = self.report.max_steps.max(b.state.steps);
                    by.entry(outcome_order(self.view.observe(&b.outcome)))
                        .or_default()
                        .add(b.state, w.mul(b.weight));
                }
            }
            history.push(Event::Call {
                oracle: a.oracle.clone(),
                args: a.args.clone(),
            });
            for ((_, obs), merged) in by {
                let group = merged.group;
                let mass = group.iter().map(|(_, w)| *w).sum();
                history.push(match &obs {
                    Some(Obs::Ret(values)) => Event::Return {
                        origin,
                        values: values.clone(),
                    },
                    Some(Obs::Yield) => Event::Yield { origin },
                    None => Event::Timeout,
                });
                self.report.histories += 1;
                if !visit(history, mass) {
                    self.report.violation = Some(history.clone());
                    return Ok(false);
                }
                if obs.is_some() && !self.go(&group, depth - 1, history, visit)? {
                    return Ok(false);
                }
                history.pop();
            }
            history.pop();
        }
        Ok(true)
    }
}

/// Visits every history of up to `depth` calls drawn from `actions`, in a
/// fixed order, stopping at the first one `visit` rejects. Responses are
/// recorded as `view` shows them, so histories an environment cannot tell
/// apart are visited once.
pub fn explore(
    exe: &Executable,
    n: u32,
    budget: Budget,
    depth: usize,
    view: View,
    actions: &[Action],
    visit: &mut dyn FnMut(&[Event], Dyadic) -> bool,
) -> Result<ExploreReport, ModelError> {
    let m = exe.machine(n, budget);
    let mut live = Merged::default();
    let mut report = ExploreReport::default();
    for b in m.initial()? {
        report.max_steps = report.max_steps.max(b.state.steps);
        if b.outcome != Outcome::Timeout {
            live.add(b.state, b.weight);
        }
    }
    let mut w = Walk {
        m,
        actions,
        view,
        report,
    };
    w.go(&live.group, depth, &mut Vec::new(), visit)?;
    Ok(w.report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;
    use crate::lang::{parse_program, WholeProgram};

    fn exe(src: &str) -> Executable {
        Executable::new(&WholeProgram::single(parse_program(src).unwrap())).unwrap()
    }

    #[test]
    fn counts_histories_and_steps() {
        let e = exe("let O() := b <- sample(1); return(b).");
        let acts = vec![Action::new("O", vec![])];
        let r = explore(
            &e,
            1,
            Budget::Unbounded,
            2,
            View::Full,
            &acts,
            &mut |_, _| true,
        )
        .unwrap();
        // two responses, then a refused second call under each
        assert_eq!(r.histories, 4);
        assert!(r.max_steps >= 3);
        assert_eq!(r.violation, None);
        let blind = explore(
            &e,
            1,
            Budget::Unbounded,
            2,
            View::Prefix(0),
            &acts,
            &mut |_, _| true,
        )
        .unwrap();
        assert_eq!(blind.histories, 2);
        assert_eq!(blind.max_steps, r.max_steps);
    }

    #[test]
    fn stops_at_rejected_history() {
        let e = exe("let O() := b <- sample(1); return(b).");
        let acts = vec![Action::new("O", vec![])];
        let bad = Event::Return {
            origin: crate::lang::Role::Program,
            values: vec![Bits::new(1, 1)],
        };
        let r = explore(
            &e,
            1,
            Budget::Unbounded,
            1,
            View::Full,
            &acts,
            &mut |h, _| h.last() != Some(&bad),
        )
        .unwrap();
        assert_eq!(r.violation.unwrap().last(), Some(&bad));
    }
}
