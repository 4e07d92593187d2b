//! Self-contained counterexample files and their replay.

use crate::behavior::Environment;
use crate::equivalence::{Counterexample, EquivKind};
use crate::lang::{link_pair, parse_program};
use crate::prob::{self, Prob};
use crate::semantics::{acceptance, Budget, Executable};
use thiserror::Error;

const MAGIC: &str = "ucrc-counterexample 1";

/// One side of the comparison: a context, a program and the budget it ran under.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorldSource {
    pub context: (String, String),
    pub program: (String, String),
    pub budget: Budget,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterexampleFile {
    pub relation: EquivKind,
    pub n: u32,
    pub left: WorldSource,
    pub right: WorldSource,
    pub env: Environment,
    pub left_one: Prob,
    pub right_one: Prob,
    pub advantage: Prob,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("counterexample file is empty")]
    Empty,
    #[error("malformed counterexample: {0}")]
    Malformed(String),
    #[error("model in counterexample: {0}")]
    Model(String),
}

impl CounterexampleFile {
    pub fn new(
        relation: &EquivKind,
        left: WorldSource,
        right: WorldSource,
        c: &Counterexample,
    ) -> Self {
        CounterexampleFile {
            relation: relation.clone(),
            n: c.n,
            left,
            right,
            env: c.env.clone(),
            left_one: c.left_one.clone(),
            right_one: c.right_one.clone(),
            advantage: c.advantage(),
            reason: c.reason.clone(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{MAGIC}\n");
        s.push_str(&format!("relation {}\n", self.relation));
        s.push_str(&format!("n {}\n", self.n));
        s.push_str(&format!("left-budget {}\n", self.left.budget));
        s.push_str(&format!("right-budget {}\n", self.right.budget));
        s.push_str(&format!("left-one {}\n", prob::format(&self.left_one)));
        s.push_str(&format!("right-one {}\n", prob::format(&self.right_one)));
        s.push_str(&format!("advantage {}\n", prob::format(&self.advantage)));
        s.push_str(&format!("reason {}\n", self.reason));
        for (tag, (name, src)) in [
            ("left-context", &self.left.context),
            ("left-program", &self.left.program),
            ("right-context", &self.right.context),
            ("right-program", &self.right.program),
        ] {
            s.push_str(&format!("%% {tag} {name}\n{}", src));
            if !src.ends_with('\n') {
                s.push('\n');
            }
        }
        s.push_str("%% env\n");
        s.push_str(&self.env.to_text());
        s
    }

    pub fn parse(text: &str) -> Result<CounterexampleFile, ReplayError> {
        if text.trim().is_empty() {
            return Err(ReplayError::Empty);
        }
        let bad = |m: &str| ReplayError::Malformed(m.to_string());
        let mut lines = text.lines();
        if lines.next() != Some(MAGIC) {
            return Err(bad("missing header"));
        }
        let mut fields: Vec<(String, String)> = Vec::new();
        let mut sections: Vec<(String, String, String)> = Vec::new();
        for line in lines {
            if let Some(rest) = line.strip_prefix("%% ") {
                let mut w = rest.splitn(2, ' ');
                let tag = w.next().unwrap_or("").to_string();
                let name = w.next().unwrap_or("").to_string();
                sections.push((tag, name, String::new()));
            } else if let Some((_, _, body)) = sections.last_mut() {
                body.push_str(line);
                body.push('\n');
            } else if let Some((k, v)) = line.split_once(' ') {
                fields.push((k.to_string(), v.to_string()));
            } else {
                return Err(bad(&format!("unexpected line `{line}`")));
            }
        }
        let field = |k: &str| {
            fields
                .iter()
                .find(|(x, _)| x == k)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| bad(&format!("missing `{k}`")))
        };
        let section = |t: &str| {
            sections
                .iter()
                .find(|(x, _, _)| x == t)
                .map(|(_, n, b)| (n.clone(), b.clone()))
                .ok_or_else(|| bad(&format!("missing section `{t}`")))
        };
        let p = |k: &str| {
            prob::parse(field(k)?).ok_or_else(|| bad(&format!("bad probability in `{k}`")))
        };
        let budget =
            |k: &str| Budget::parse(field(k)?).ok_or_else(|| bad(&format!("bad budget in `{k}`")));
        Ok(CounterexampleFile {
            relation: EquivKind::parse(field("relation")?).map_err(|e| bad(&e.to_string()))?,
            n: field("n")?.parse().map_err(|_| bad("bad `n`"))?,
            left: WorldSource {
                context: section("left-context")?,
                program: section("left-program")?,
                budget: budget("left-budget")?,
            },
            right: WorldSource {
                context: section("right-context")?,
                program: section("right-program")?,
                budget: budget("right-budget")?,
            },
            env: Environment::parse(&section("env")?.1).map_err(|e| bad(&e.to_string()))?,
            left_one: p("left-one")?,
            right_one: p("right-one")?,
            advantage: p("advantage")?,
            reason: field("reason")?.to_string(),
        })
    }
}

/// Outcome of re-running a counterexample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replay {
    pub left_one: Prob,
    pub right_one: Prob,
    /// Recomputed values equal the recorded ones.
    pub matches: bool,
    /// The recorded environment really violates the relation at `n`.
    pub violates: bool,
}

impl Replay {
    pub fn confirmed(&self) -> bool {
        self.matches && self.violates
    }
}

fn world(w: &WorldSource) -> Result<Executable, ReplayError> {
    let model = |(name, src): &(String, String)| {
        parse_program(src).map_err(|e| ReplayError::Model(format!("{name}: {e}")))
    };
    let linked = link_pair(&model(&w.context)?, &model(&w.program)?)
        .map_err(|e| ReplayError::Model(e.to_string()))?;
    Executable::new(&linked).map_err(|e| ReplayError::Model(e.to_string()))
}

pub fn replay(cx: &CounterexampleFile) -> Result<Replay, ReplayError> {
    let run = |w: &WorldSource| -> Result<Prob, ReplayError> {
        let (one, _) = acceptance(&world(w)?, &cx.env, cx.n, w.budget)
            .map_err(|e| ReplayError::Model(e.to_string()))?;
        Ok(one.to_ratio())
    };
    let (l, r) = (run(&cx.left)?, run(&cx.right)?);
    let adv = prob::abs(&(l.clone() - r.clone()));
    let matches = l == cx.left_one && r == cx.right_one && adv == cx.advantage;
    let violates = match cx.relation {
        EquivKind::Perfect => adv > prob::zero(),
        EquivKind::Refinement => l > prob::zero() && r == prob::zero(),
        ref k => !k.bound_holds(cx.n, &adv),
    };
    Ok(Replay {
        left_one: l,
        right_one: r,
        matches,
        violates,
    })
}
