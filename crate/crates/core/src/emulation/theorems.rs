//! Robust compilation criteria and the emulation-set characterisation,
//! decided by exhaustive search over a finite universe.

use super::universe::{Ceilings, EmulationError, Evaluator, Lang, Pair};
use crate::equivalence::EquivKind;
use std::fmt;

/// A compiler on a finite universe: source program `i` compiles to target program `map[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compiler {
    pub name: String,
    pub map: Vec<usize>,
}

impl Compiler {
    pub fn identity(n: usize) -> Compiler {
        Compiler {
            name: "id".into(),
            map: (0..n).collect(),
        }
    }

    /// Every map from `sources` programs into `targets` programs, in
    /// lexicographic order of the image vector.
    pub fn all(
        sources: usize,
        targets: usize,
        ceilings: &Ceilings,
    ) -> Result<Vec<Compiler>, EmulationError> {
        let count = (targets as u128)
            .checked_pow(sources as u32)
            .unwrap_or(u128::MAX);
        if count > ceilings.compilers {
            return Err(EmulationError::TooLarge {
                what: "compiler maps".into(),
                count,
                ceiling: ceilings.compilers,
            });
        }
        let mut out = Vec::new();
        for k in 0..count as usize {
            let mut map = vec![0; sources];
            let mut r = k;
            for slot in map.iter_mut().rev() {
                *slot = r % targets;
                r /= targets;
            }
            let name = format!(
                "cm[{}]",
                map.iter()
                    .map(|t| t.to_string())
                    .collect::<Vec<_>>()
                    .join("")
            );
            out.push(Compiler { name, map });
        }
        Ok(out)
    }
}

/// Why a criterion fails: the pairs involved, by label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub detail: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.detail)
    }
}

/// Source behaviours equivalent to `x`, among admissible source contexts of program `p`.
fn matched_by(
    ev: &Evaluator,
    kind: &EquivKind,
    x: Pair,
    p: usize,
) -> Result<Option<usize>, EmulationError> {
    for c in 0..ev.universe.source_contexts.len() {
        let y = (Lang::Source, c, p);
        if ev.admissible(y) && ev.related(kind, x, y)? {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

/// Robust preservation of relational behaviour: every admissible target
/// context of a compiled program is matched by an admissible source context
/// of the source program.
pub fn check_pred_rhc(
    ev: &Evaluator,
    cm: &Compiler,
    kind: &EquivKind,
) -> Result<Option<Failure>, EmulationError> {
    for (p, &t) in cm.map.iter().enumerate() {
        for c in 0..ev.universe.target_contexts.len() {
            let x = (Lang::Target, c, t);
            if ev.admissible(x) && matched_by(ev, kind, x, p)?.is_none() {
                return Ok(Some(Failure {
                    detail: format!(
                        "{} compiled from {} has no source match",
                        ev.label(x),
                        ev.universe.source_programs[p].name
                    ),
                }));
            }
        }
    }
    Ok(None)
}

/// Membership of a behaviour in the hyperproperty anchored at source program `f`:
/// the behaviours equivalent to `ctx ⋈ f` for some admissible source context.
pub fn hyp_membership(
    ev: &Evaluator,
    kind: &EquivKind,
    x: Pair,
    f: usize,
) -> Result<bool, EmulationError> {
    Ok(matched_by(ev, kind, x, f)?.is_some())
}

/// Robust preservation of the anchored hyperproperties: whenever every
/// admissible source context of `p` lands in `H_f`, so does every
/// admissible target context of the compiled `p`.
pub fn check_pred_rhp(
    ev: &Evaluator,
    cm: &Compiler,
    kind: &EquivKind,
) -> Result<Option<Failure>, EmulationError> {
    let u = &ev.universe;
    for f in 0..u.source_programs.len() {
        for (p, &t) in cm.map.iter().enumerate() {
            let mut source_sat = true;
            for c in 0..u.source_contexts.len() {
                let x = (Lang::Source, c, p);
                if ev.admissible(x) && !hyp_membership(ev, kind, x, f)? {
                    source_sat = false;
                    break;
                }
            }
            if !source_sat {
                continue;
            }
            for c in 0..u.target_contexts.len() {
                let x = (Lang::Target, c, t);
                if ev.admissible(x) && !hyp_membership(ev, kind, x, f)? {
                    return Ok(Some(Failure {
                        detail: format!(
                            "{} leaves H[{}] although every source context of {} stays in it",
                            ev.label(x),
                            u.source_programs[f].name,
                            u.source_programs[p].name
                        ),
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Whether the target program `t` emulates the source program `f`: every
/// admissible target attacker has an admissible source simulator.
pub fn emul_target(
    ev: &Evaluator,
    kind: &EquivKind,
    t: usize,
    f: usize,
) -> Result<bool, EmulationError> {
    for a in 0..ev.universe.target_contexts.len() {
        let x = (Lang::Target, a, t);
        if ev.admissible(x) && matched_by(ev, kind, x, f)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the source program `f` emulates the source program `g` against source attackers.
pub fn emul_source(
    ev: &Evaluator,
    kind: &EquivKind,
    f: usize,
    g: usize,
) -> Result<bool, EmulationError> {
    for a in 0..ev.universe.source_contexts.len() {
        let x = (Lang::Source, a, f);
        if ev.admissible(x) && matched_by(ev, kind, x, g)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `f ∈ Emul_tgt(t)`, and `Emul_src(f) ⊆ Emul_tgt(t)`.
pub fn emul_set_membership(
    ev: &Evaluator,
    kind: &EquivKind,
    t: usize,
    f: usize,
) -> Result<(bool, bool), EmulationError> {
    let member = emul_target(ev, kind, t, f)?;
    let mut subset = true;
    for g in 0..ev.universe.source_programs.len() {
        if emul_source(ev, kind, f, g)? && !emul_target(ev, kind, t, g)? {
            subset = false;
            break;
        }
    }
    Ok((member, subset))
}

/// Agreement counts for one relation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TheoremLine {
    pub kind: String,
    pub compilers: usize,
    pub rhc_holds: usize,
    pub rhc_rhp_disagreements: usize,
    pub lemma_checks: usize,
    pub lemma_members: usize,
    pub lemma_disagreements: usize,
    pub first_disagreement: Option<String>,
}

impl fmt::Display for TheoremLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.rhc_rhp_disagreements == 0 && self.lemma_disagreements == 0 {
            "pass"
        } else {
            "fail"
        };
        write!(
            f,
            "check=theorems status={status} detail=relation={} compilers={} rhc_holds={} rhc_vs_rhp_disagree={} emul_checks={} emul_members={} emul_vs_subset_disagree={}",
            self.kind,
            self.compilers,
            self.rhc_holds,
            self.rhc_rhp_disagreements,
            self.lemma_checks,
            self.lemma_members,
            self.lemma_disagreements
        )?;
        if let Some(d) = &self.first_disagreement {
            write!(f, " first={d}")?;
        }
        Ok(())
    }
}

/// Decides both criteria for every compiler and the emulation-set
/// characterisation for every compiled program and source functionality.
pub fn cross_check_theorems(
    ev: &Evaluator,
    compilers: &[Compiler],
    kind: &EquivKind,
) -> Result<TheoremLine, EmulationError> {
    let mut line = TheoremLine {
        kind: kind.to_string(),
        compilers: compilers.len(),
        ..TheoremLine::default()
    };
    let nf = ev.universe.source_programs.len();
    for cm in compilers {
        let rhc = check_pred_rhc(ev, cm, kind)?.is_none();
        let rhp = check_pred_rhp(ev, cm, kind)?.is_none();
        line.rhc_holds += rhc as usize;
        if rhc != rhp {
            line.rhc_rhp_disagreements += 1;
            line.first_disagreement
                .get_or_insert_with(|| format!("{}:rhc={rhc},rhp={rhp}", cm.name));
        }
    }
    let mut targets: Vec<usize> = compilers
        .iter()
        .flat_map(|c| c.map.iter().copied())
        .collect();
    targets.sort();
    targets.dedup();
    for &t in &targets {
        for f in 0..nf {
            let (member, subset) = emul_set_membership(ev, kind, t, f)?;
            line.lemma_checks += 1;
            line.lemma_members += member as usize;
            if member != subset {
                line.lemma_disagreements += 1;
                line.first_disagreement.get_or_insert_with(|| {
                    format!(
                        "emul({},{}):member={member},subset={subset}",
                        ev.universe.target_programs[t].name, ev.universe.source_programs[f].name
                    )
                });
            }
        }
    }
    Ok(line)
}
