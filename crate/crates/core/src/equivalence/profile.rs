//! Advantage profiles, verdicts and counterexamples.

use super::spec::EquivKind;
use crate::behavior::{BinaryDistFamily, Environment};
use crate::prob::{self, Prob};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("grids differ: {0:?} vs {1:?}")]
    GridMismatch(Vec<u32>, Vec<u32>),
    #[error("environment registries differ")]
    EnvMismatch,
    #[error(transparent)]
    Model(#[from] crate::semantics::ModelError),
    #[error(transparent)]
    Space(#[from] super::spec::SpaceError),
}

/// `|Pr[X_n = 1] - Pr[Y_n = 1]|` per grid point.
pub fn binary_diff(
    x: &BinaryDistFamily,
    y: &BinaryDistFamily,
) -> Result<Vec<(u32, Prob)>, EquivError> {
    let gx: Vec<u32> = x.per_n.iter().map(|(n, _)| *n).collect();
    let gy: Vec<u32> = y.per_n.iter().map(|(n, _)| *n).collect();
    if gx != gy {
        return Err(EquivError::GridMismatch(gx, gy));
    }
    Ok(x.per_n
        .iter()
        .zip(&y.per_n)
        .map(|((n, a), (_, b))| (*n, prob::abs(&(a.one.clone() - b.one.clone()))))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffEntry {
    pub env_id: String,
    pub n: u32,
    pub adv: Prob,
}

/// Advantages per (environment, n), kept sorted by environment then `n`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiffProfile {
    pub entries: Vec<DiffEntry>,
}

pub const CSV_HEADER: &str = "env_id,n,advantage_num,advantage_den";

impl DiffProfile {
    pub fn new(mut entries: Vec<DiffEntry>) -> Self {
        entries.sort_by(|a, b| (&a.env_id, a.n).cmp(&(&b.env_id, b.n)));
        DiffProfile { entries }
    }

    pub fn grid(&self) -> Vec<u32> {
        let mut g: Vec<u32> = self.entries.iter().map(|e| e.n).collect();
        g.sort();
        g.dedup();
        g
    }

    /// The first environment attaining the largest advantage at `n`.
    pub fn worst(&self, n: u32) -> Option<&DiffEntry> {
        self.entries.iter().filter(|e| e.n == n).fold(
            None,
            |best: Option<&DiffEntry>, e| match best {
                Some(b) if b.adv >= e.adv => Some(b),
                _ => Some(e),
            },
        )
    }

    /// Worst advantage per grid point.
    pub fn curve(&self) -> Vec<(u32, Prob)> {
        self.grid()
            .into_iter()
            .filter_map(|n| self.worst(n).map(|e| (n, e.adv.clone())))
            .collect()
    }

    pub fn non_increasing(&self) -> bool {
        self.curve().windows(2).all(|w| w[1].1 <= w[0].1)
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.curve().windows(2).all(|w| w[1].1 < w[0].1)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{CSV_HEADER}\n");
        for e in &self.entries {
            s.push_str(&format!(
                "{},{},{},{}\n",
                e.env_id,
                e.n,
                e.adv.numer(),
                e.adv.denom()
            ));
        }
        s
    }

    pub fn parse_csv(text: &str) -> Option<DiffProfile> {
        let mut entries = Vec::new();
        for line in text
            .lines()
            .filter(|l| !l.trim().is_empty() && *l != CSV_HEADER)
        {
            let parts: Vec<&str> = line.split(',').collect();
            let [id, n, num, den] = parts[..] else {
                return None;
            };
            entries.push(DiffEntry {
                env_id: id.to_string(),
                n: n.parse().ok()?,
                adv: prob::parse(&format!("{num}/{den}"))?,
            });
        }
        Some(DiffProfile::new(entries))
    }

    pub fn curve_text(&self) -> String {
        self.curve()
            .iter()
            .map(|(n, p)| format!("n={n}:{}", prob::format(p)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A distinguishing environment with both acceptance probabilities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub env: Environment,
    pub n: u32,
    pub left_one: Prob,
    pub right_one: Prob,
    pub reason: String,
}

impl Counterexample {
    pub fn advantage(&self) -> Prob {
        prob::abs(&(self.left_one.clone() - self.right_one.clone()))
    }
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub holds: bool,
    pub kind: EquivKind,
    pub profile: DiffProfile,
    /// Whether the worst-case advantage never grows along the grid.
    pub monotone: bool,
    pub counterexample: Option<Counterexample>,
}

impl Verdict {
    pub fn detail(&self) -> String {
        let mut s = format!(
            "relation={} curve=[{}] monotone={}",
            self.kind,
            self.profile.curve_text(),
            self.monotone
        );
        if let Some(c) = &self.counterexample {
            s.push_str(&format!(
                " counterexample={}@n={} advantage={} reason={}",
                c.env.name,
                c.n,
                prob::format(&c.advantage()),
                c.reason
            ));
        }
        s
    }
}

/// Worst advantage per `n` keyed for quick lookup.
pub fn curve_map(p: &DiffProfile) -> BTreeMap<u32, Prob> {
    p.curve().into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::BitDist;

    fn fam(ones: &[(u32, Prob)]) -> BinaryDistFamily {
        BinaryDistFamily {
            per_n: ones
                .iter()
                .map(|(n, p)| {
                    (
                        *n,
                        BitDist {
                            one: p.clone(),
                            zero: prob::one() - p.clone(),
                            bot: prob::zero(),
                        },
                    )
                })
                .collect(),
        }
    }

    #[test]
    fn diff_is_symmetric_and_exact() {
        let x = fam(&[(1, prob::ratio(1, 2)), (2, prob::ratio(1, 3))]);
        let y = fam(&[(1, prob::ratio(3, 4)), (2, prob::ratio(1, 3))]);
        assert_eq!(
            binary_diff(&x, &y).unwrap(),
            vec![(1, prob::ratio(1, 4)), (2, prob::zero())]
        );
        assert_eq!(binary_diff(&x, &y).unwrap(), binary_diff(&y, &x).unwrap());
        let z = fam(&[(1, prob::zero())]);
        assert!(binary_diff(&x, &z).is_err());
    }

    #[test]
    fn csv_round_trip_and_curve() {
        let p = DiffProfile::new(vec![
            DiffEntry {
                env_id: "z1".into(),
                n: 2,
                adv: prob::ratio(1, 4),
            },
            DiffEntry {
                env_id: "z0".into(),
                n: 1,
                adv: prob::ratio(1, 2),
            },
            DiffEntry {
                env_id: "z1".into(),
                n: 1,
                adv: prob::ratio(1, 2),
            },
        ]);
        let csv = p.to_csv();
        assert_eq!(
            csv,
            "env_id,n,advantage_num,advantage_den\nz0,1,1,2\nz1,1,1,2\nz1,2,1,4\n"
        );
        assert_eq!(DiffProfile::parse_csv(&csv).unwrap(), p);
        assert_eq!(p.worst(1).unwrap().env_id, "z0");
        assert!(p.strictly_decreasing());
    }
}
