//! Reflexivity and transitivity of the relations on sampled behaviours.

use super::check::compare_behaviors;
use super::profile::EquivError;
use super::spec::EquivKind;
use crate::behavior::Behavior;
use crate::prob;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LawReport {
    pub reflexive_checks: usize,
    pub transitive_checks: usize,
    pub violations: Vec<String>,
}

impl LawReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks reflexivity on every behaviour and transitivity on every triple.
/// Closeness relations are checked in triangle form per (environment, n).
pub fn preorder_laws(
    kind: &EquivKind,
    samples: &[(Behavior, Behavior, Behavior)],
) -> Result<LawReport, EquivError> {
    let mut r = LawReport::default();
    for (i, (a, b, c)) in samples.iter().enumerate() {
        for (name, x) in [("a", a), ("b", b), ("c", c)] {
            r.reflexive_checks += 1;
            if !compare_behaviors(x, x, kind)?.holds {
                r.violations
                    .push(format!("sample {i}: {name} not related to itself"));
            }
        }
        r.transitive_checks += 1;
        match kind {
            EquivKind::Perfect | EquivKind::Refinement => {
                let ab = compare_behaviors(a, b, kind)?.holds;
                let bc = compare_behaviors(b, c, kind)?.holds;
                if ab && bc && !compare_behaviors(a, c, kind)?.holds {
                    r.violations
                        .push(format!("sample {i}: a~b and b~c but not a~c"));
                }
            }
            EquivKind::Statistical(_) | EquivKind::CompProxy { .. } => {
                let ab = compare_behaviors(a, b, kind)?.profile;
                let bc = compare_behaviors(b, c, kind)?.profile;
                let ac = compare_behaviors(a, c, kind)?.profile;
                for ((x, y), z) in ab.entries.iter().zip(&bc.entries).zip(&ac.entries) {
                    if z.adv > x.adv.clone() + y.adv.clone() {
                        r.violations.push(format!(
                            "sample {i}: env={} n={} d(a,c)={} > d(a,b)+d(b,c)={}",
                            z.env_id,
                            z.n,
                            prob::format(&z.adv),
                            prob::format(&(x.adv.clone() + y.adv.clone()))
                        ));
                    }
                }
            }
        }
    }
    Ok(r)
}
