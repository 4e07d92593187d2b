//! The canonical environment of a trace prefix.

use super::env::{Action, Environment, Node, Obs, View};
use crate::prob::Dyadic;
use crate::semantics::{format_trace, Event, Trace, TraceDist};
use thiserror::Error;

/// A finite action sequence together with the probability of producing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TracePrefix {
    pub mu: Trace,
    pub rho: Dyadic,
    pub n: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("malformed prefix at event {index}: {reason}")]
pub struct MalformedPrefix {
    pub index: usize,
    pub reason: &'static str,
}

/// Splits a prefix into (call, observation) pairs; a trailing decide is dropped.
fn pairs(mu: &[Event]) -> Result<Vec<(Action, Obs)>, MalformedPrefix> {
    let body = match mu.last() {
        Some(Event::Decide(_)) => &mu[..mu.len() - 1],
        _ => mu,
    };
    if body.len() % 2 != 0 {
        return Err(MalformedPrefix {
            index: body.len() - 1,
            reason: "call without response",
        });
    }
    body.chunks(2)
        .enumerate()
        .map(|(i, c)| {
            let Event::Call { oracle, args } = &c[0] else {
                return Err(MalformedPrefix {
                    index: 2 * i,
                    reason: "expected an environment call",
                });
            };
            let obs = match &c[1] {
                Event::Return { values, .. } => Obs::Ret(values.clone()),
                Event::Yield { .. } => Obs::Yield,
                _ => {
                    return Err(MalformedPrefix {
                        index: 2 * i + 1,
                        reason: "expected a response",
                    })
                }
            };
            Ok((
                Action {
                    oracle: oracle.clone(),
                    args: args.clone(),
                },
                obs,
            ))
        })
        .collect()
}

/// Replays the calls of `mu`; decides 0 on the first deviating response and 1
/// once the whole prefix has been reproduced.
pub fn canonical_env(mu: &[Event]) -> Result<Environment, MalformedPrefix> {
    let mut node = Node::Decide(true);
    for (action, obs) in pairs(mu)?.into_iter().rev() {
        node = Node::call(action, vec![(obs, node)], Node::Decide(false));
    }
    Ok(Environment::new(
        format!("canon[{}]", format_trace(mu)),
        View::Full,
        node,
    ))
}

/// The prefix `mu` completed by the canonical environment's accepting decision.
pub fn accepted(mu: &[Event]) -> Trace {
    let mut t: Trace = match mu.last() {
        Some(Event::Decide(_)) => mu[..mu.len() - 1].to_vec(),
        _ => mu.to_vec(),
    };
    t.push(Event::Decide(true));
    t
}

/// Mass of complete traces in `d` that begin with `mu`.
pub fn prefix_mass(d: &TraceDist, mu: &[Event]) -> Dyadic {
    d.entries
        .iter()
        .filter(|(t, _)| t.starts_with(mu))
        .map(|(_, p)| *p)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;
    use crate::lang::{parse_program, Role, WholeProgram};
    use crate::semantics::{enumerate_traces, Budget, Executable};

    fn exe(src: &str) -> Executable {
        Executable::new(&WholeProgram::single(parse_program(src).unwrap())).unwrap()
    }

    fn ret(v: u64, w: u32) -> Event {
        Event::Return {
            origin: Role::Program,
            values: vec![Bits::new(v, w)],
        }
    }

    #[test]
    fn deterministic_prefix_is_reproduced() {
        let e = exe("let O() := return(0b1).");
        let mu = vec![Event::call("O", vec![]), ret(1, 1)];
        let d = enumerate_traces(&e, &canonical_env(&mu).unwrap(), 1, Budget::Unbounded).unwrap();
        assert_eq!(d.prob(&accepted(&mu)), Dyadic::ONE);
    }

    #[test]
    fn sampled_bit_is_forced_with_half_probability() {
        let e = exe("let O() := b <- sample(1); return(b).");
        let mu = vec![Event::call("O", vec![]), ret(0, 1)];
        let d = enumerate_traces(&e, &canonical_env(&mu).unwrap(), 2, Budget::Unbounded).unwrap();
        assert_eq!(d.prob(&accepted(&mu)), Dyadic::pow2_neg(1));
        assert_eq!(d.bits().zero, crate::prob::ratio(1, 2));
    }

    #[test]
    fn malformed_prefixes_are_rejected() {
        assert!(canonical_env(&[Event::call("O", vec![])]).is_err());
        assert!(canonical_env(&[ret(0, 1), Event::call("O", vec![])]).is_err());
        assert!(canonical_env(&[Event::Decide(true)]).is_ok());
    }
}
