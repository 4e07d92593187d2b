//! Events, traces and exact trace distributions.

use crate::bits::Bits;
use crate::lang::Role;
use crate::prob::{Dyadic, Prob};
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Event {
    /// Environment invokes an exported oracle.
    Call {
        oracle: Arc<str>,
        args: Vec<Bits>,
    },
    Return {
        origin: Role,
        values: Vec<Bits>,
    },
    Yield {
        origin: Role,
    },
    Decide(bool),
    Timeout,
}

fn join(bs: &[Bits]) -> String {
    bs.iter()
        .map(|b| b.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Call { oracle, args } => write!(f, "env:call:{oracle}({})", join(args)),
            Event::Return { origin, values } => write!(f, "{origin}:ret({})", join(values)),
            Event::Yield { origin } => write!(f, "{origin}:yield"),
            Event::Decide(b) => write!(f, "env:decide:{}", *b as u8),
            Event::Timeout => f.write_str("env:timeout"),
        }
    }
}

impl Event {
    pub fn call(oracle: &str, args: Vec<Bits>) -> Event {
        Event::Call {
            oracle: Arc::from(oracle),
            args,
        }
    }

    /// Same event with its origin attributed to the program role.
    pub fn erased(&self) -> Event {
        match self {
            Event::Return { values, .. } => Event::Return {
                origin: Role::Program,
                values: values.clone(),
            },
            Event::Yield { .. } => Event::Yield {
                origin: Role::Program,
            },
            e => e.clone(),
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, Event::Decide(_) | Event::Timeout)
    }
}

pub type Trace = Vec<Event>;

pub fn format_trace(t: &[Event]) -> String {
    t.iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// The extraction function β: the decided bit, or `None` for ⊥.
pub fn final_bit(actions: &[Event]) -> Option<bool> {
    match actions.last() {
        Some(Event::Decide(b)) => Some(*b),
        _ => None,
    }
}

/// Exact distribution over complete traces at one security parameter.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TraceDist {
    pub n: u32,
    pub entries: HashMap<Trace, Dyadic>,
}

/// `(Pr[=1], Pr[=0], Pr[⊥])` at one security parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitDist {
    pub one: Prob,
    pub zero: Prob,
    pub bot: Prob,
}

impl TraceDist {
    pub fn new(n: u32) -> Self {
        TraceDist {
            n,
            entries: HashMap::new(),
        }
    }

    pub fn add(&mut self, t: Trace, p: Dyadic) {
        if p.is_zero() {
            return;
        }
        let e = self.entries.entry(t).or_insert(Dyadic::ZERO);
        *e = e.add(p);
    }

    pub fn total(&self) -> Dyadic {
        self.entries.values().copied().sum()
    }

    pub fn prob(&self, t: &[Event]) -> Dyadic {
        self.entries.get(t).copied().unwrap_or(Dyadic::ZERO)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Aggregates mass by an extraction function (β by default).
    pub fn bits_with(&self, beta: &dyn Fn(&[Event]) -> Option<bool>) -> BitDist {
        let (mut one, mut zero, mut bot) = (Dyadic::ZERO, Dyadic::ZERO, Dyadic::ZERO);
        for (t, p) in &self.entries {
            match beta(t) {
                Some(true) => one = one.add(*p),
                Some(false) => zero = zero.add(*p),
                None => bot = bot.add(*p),
            }
        }
        BitDist {
            one: one.to_ratio(),
            zero: zero.to_ratio(),
            bot: bot.to_ratio(),
        }
    }

    pub fn bits(&self) -> BitDist {
        self.bits_with(&final_bit)
    }

    pub fn erase_origins(&self) -> TraceDist {
        let mut out = TraceDist::new(self.n);
        for (t, p) in &self.entries {
            out.add(t.iter().map(Event::erased).collect(), *p);
        }
        out
    }

    /// Canonical text lines `n=<n> p=<num>/<den> <events>`, sorted.
    pub fn lines(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .entries
            .iter()
            .map(|(t, p)| {
                format!(
                    "n={} p={} {}",
                    self.n,
                    crate::prob::format(&p.to_ratio()),
                    format_trace(t)
                )
            })
            .collect();
        v.sort();
        v
    }

    pub fn to_text(&self) -> String {
        let mut s = self.lines().join("\n");
        s.push('\n');
        s
    }

    pub fn support_subset(&self, other: &TraceDist) -> bool {
        self.entries.keys().all(|t| other.entries.contains_key(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialization() {
        let t = vec![
            Event::call("O", vec![Bits::new(1, 2)]),
            Event::Return {
                origin: Role::Context,
                values: vec![Bits::new(1, 1), Bits::new(6, 4)],
            },
            Event::Decide(true),
        ];
        assert_eq!(
            format_trace(&t),
            "env:call:O(01);ctx:ret(1,0110);env:decide:1"
        );
        assert_eq!(final_bit(&t), Some(true));
        assert_eq!(final_bit(&[Event::Timeout]), None);
        assert_eq!(final_bit(&[]), None);
    }

    #[test]
    fn bits_partition_mass() {
        let mut d = TraceDist::new(1);
        d.add(vec![Event::Decide(true)], Dyadic::pow2_neg(1));
        d.add(vec![Event::Timeout], Dyadic::pow2_neg(2));
        d.add(vec![Event::Decide(false)], Dyadic::pow2_neg(2));
        let b = d.bits();
        assert_eq!(b.one, crate::prob::ratio(1, 2));
        assert_eq!(b.zero + b.bot, crate::prob::ratio(1, 2));
        assert_eq!(d.total(), Dyadic::ONE);
        assert_eq!(d.lines()[0], "n=1 p=1/2 env:decide:1");
    }
}
