//! Which relation compares behaviours, and over which environments.

use crate::behavior::{Action, Environment, View};
use crate::bits::Bits;
use crate::prob::{self, Prob};
use crate::semantics::Executable;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Closeness bound `ε(n)` of the statistical relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Schedule {
    Const(Prob),
    /// `2^-n`
    Pow2Neg,
    /// `n^-c`
    InvPow(u32),
}

impl Schedule {
    pub fn at(&self, n: u32) -> Prob {
        match self {
            Schedule::Const(p) => p.clone(),
            Schedule::Pow2Neg => prob::pow2_neg(n),
            Schedule::InvPow(c) => prob::inv_pow(n, *c),
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Const(p) => f.write_str(&prob::format(p)),
            Schedule::Pow2Neg => f.write_str("2^-n"),
            Schedule::InvPow(c) => write!(f, "n^-{c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivKind {
    Perfect,
    Statistical(Schedule),
    /// Advantage below `n^-c` at every grid point `n > N`.
    CompProxy {
        c: u32,
        big_n: u32,
    },
    Refinement,
}

impl fmt::Display for EquivKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquivKind::Perfect => f.write_str("perfect"),
            EquivKind::Statistical(s) => write!(f, "stat:{s}"),
            EquivKind::CompProxy { c, big_n } => write!(f, "comp:c={c},N={big_n}"),
            EquivKind::Refinement => f.write_str("refine"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("invalid relation `{0}`; expected perfect, stat:<eps>, comp:c=<c>,N=<N> or refine")]
pub struct BadSpec(pub String);

impl EquivKind {
    /// Whether a single advantage at `n` is within the relation's bound.
    /// Perfect and refinement impose none here; they are checked on traces.
    pub fn bound_holds(&self, n: u32, adv: &Prob) -> bool {
        match self {
            EquivKind::Statistical(s) => *adv <= s.at(n),
            EquivKind::CompProxy { c, big_n } => n <= *big_n || *adv < prob::inv_pow(n, *c),
            EquivKind::Perfect | EquivKind::Refinement => true,
        }
    }

    pub fn parse(s: &str) -> Result<EquivKind, BadSpec> {
        let bad = || BadSpec(s.to_string());
        if s == "perfect" {
            return Ok(EquivKind::Perfect);
        }
        if s == "refine" {
            return Ok(EquivKind::Refinement);
        }
        if let Some(e) = s.strip_prefix("stat:") {
            let sched = if e == "2^-n" {
                Schedule::Pow2Neg
            } else if let Some(c) = e.strip_prefix("n^-") {
                Schedule::InvPow(c.parse().map_err(|_| bad())?)
            } else {
                let p = prob::parse(e).ok_or_else(bad)?;
                if p <= prob::zero() {
                    return Err(bad());
                }
                Schedule::Const(p)
            };
            return Ok(EquivKind::Statistical(sched));
        }
        if let Some(rest) = s.strip_prefix("comp:") {
            let (mut c, mut big_n) = (None, None);
            for part in rest.split(',') {
                match part.split_once('=') {
                    Some(("c", v)) => c = v.parse().ok(),
                    Some(("N", v)) => big_n = v.parse().ok(),
                    _ => return Err(bad()),
                }
            }
            let c = c.filter(|&c| c > 0).ok_or_else(bad)?;
            return Ok(EquivKind::CompProxy {
                c,
                big_n: big_n.ok_or_else(bad)?,
            });
        }
        Err(bad())
    }
}

/// Calls available to bounded environments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CallSpace {
    /// Every exported oracle with every argument combination at the current `n`.
    AllArgs,
    Fixed(Vec<Action>),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("call space of {count} actions at n={n} exceeds the ceiling {ceiling}")]
    TooLarge { n: u32, count: u128, ceiling: u128 },
}

impl CallSpace {
    pub fn actions(
        &self,
        exe: &Executable,
        n: u32,
        ceiling: u128,
    ) -> Result<Vec<Action>, SpaceError> {
        match self {
            CallSpace::Fixed(v) => Ok(v.clone()),
            CallSpace::AllArgs => {
                let mut out = Vec::new();
                let mut total: u128 = 0;
                for (name, o) in &exe.ir.exports {
                    let widths: Vec<u32> = exe.ir.oracles[*o as usize]
                        .params
                        .iter()
                        .map(|(_, w)| w.at(n))
                        .collect();
                    let bits: u32 = widths.iter().sum();
                    total = total.saturating_add(1u128.checked_shl(bits).unwrap_or(u128::MAX));
                    if total > ceiling {
                        return Err(SpaceError::TooLarge {
                            n,
                            count: total,
                            ceiling,
                        });
                    }
                    for v in 0..(1u64 << bits) {
                        let mut args = Vec::new();
                        let mut shift = bits;
                        for &w in &widths {
                            shift -= w;
                            args.push(Bits::new((v >> shift) & ((1u64 << w) - 1), w));
                        }
                        out.push(Action {
                            oracle: name.clone(),
                            args,
                        });
                    }
                }
                Ok(out)
            }
        }
    }
}

/// The environments a comparison quantifies over.
#[derive(Clone, Debug)]
pub enum EnvClass {
    /// An explicit list, e.g. every tree of an alphabet up to some depth.
    Explicit(Arc<Vec<Environment>>),
    /// Every decision tree of at most `depth` calls drawn from `calls`,
    /// branching on responses as seen through `view`. Searched, not listed.
    Bounded {
        depth: usize,
        view: View,
        calls: CallSpace,
    },
}

impl EnvClass {
    pub fn describe(&self) -> String {
        match self {
            EnvClass::Explicit(v) => format!("explicit({})", v.len()),
            EnvClass::Bounded { depth, view, .. } => format!("bounded(depth={depth},view={view})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EquivSpec {
    pub kind: EquivKind,
    pub class: EnvClass,
}
