//! Finite universes of programs and contexts, with cached behaviours.

use crate::behavior::{behav, Behavior, Environment};
use crate::equivalence::{compare_behaviors, EquivError, EquivKind, SpaceError};
use crate::lang::{link_pair, OracleProgram};
use crate::semantics::{check_predicate, Budget, Executable, ModelError};
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use thiserror::Error;

/// A program with the name it is reported under.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Named {
    pub name: String,
    pub program: OracleProgram,
}

impl Named {
    pub fn new(name: impl Into<String>, program: OracleProgram) -> Named {
        Named {
            name: name.into(),
            program,
        }
    }
}

#[derive(Debug, Error)]
pub enum EmulationError {
    #[error("{pair}: {source}")]
    Model { pair: String, source: ModelError },
    #[error(transparent)]
    Equiv(#[from] EquivError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("{what}: {count} exceeds the ceiling {ceiling}")]
    TooLarge {
        what: String,
        count: u128,
        ceiling: u128,
    },
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
}

impl EmulationError {
    pub fn is_ceiling(&self) -> bool {
        matches!(
            self,
            EmulationError::TooLarge { .. }
                | EmulationError::Space(_)
                | EmulationError::Equiv(EquivError::Space(_))
        )
    }
}

/// Limits on how much a universe may ask for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ceilings {
    /// Linked whole programs per language.
    pub pairs: u128,
    /// Environment evaluations per language (pairs times envs times grid points).
    pub runs: u128,
    pub compilers: u128,
}

impl Default for Ceilings {
    fn default() -> Self {
        Ceilings {
            pairs: 64,
            runs: 200_000,
            compilers: 4096,
        }
    }
}

/// Source or target side of a compilation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lang {
    Source,
    Target,
}

/// Programs and contexts of both languages, one explicit environment list,
/// and the step budget defining each language's predicate.
#[derive(Clone, Debug)]
pub struct Universe {
    pub source_programs: Vec<Named>,
    pub target_programs: Vec<Named>,
    pub source_contexts: Vec<Named>,
    pub target_contexts: Vec<Named>,
    pub envs: Arc<Vec<Environment>>,
    pub grid: Vec<u32>,
    pub source_budget: Budget,
    pub target_budget: Budget,
}

impl Universe {
    pub fn programs(&self, l: Lang) -> &[Named] {
        match l {
            Lang::Source => &self.source_programs,
            Lang::Target => &self.target_programs,
        }
    }

    pub fn contexts(&self, l: Lang) -> &[Named] {
        match l {
            Lang::Source => &self.source_contexts,
            Lang::Target => &self.target_contexts,
        }
    }

    pub fn budget(&self, l: Lang) -> Budget {
        match l {
            Lang::Source => self.source_budget,
            Lang::Target => self.target_budget,
        }
    }
}

/// A linked context and program: `(language, context index, program index)`.
pub type Pair = (Lang, usize, usize);

struct Cell {
    behavior: Behavior,
    /// Whether the pair stays within its language's budget on every environment.
    admissible: bool,
}

/// Behaviours and predicates of every pair, and a memo of relation queries.
pub struct Evaluator {
    pub universe: Universe,
    cells: HashMap<Pair, Cell>,
    memo: Mutex<HashMap<(String, Pair, Pair), bool>>,
}

impl Evaluator {
    pub fn new(universe: Universe, ceilings: &Ceilings) -> Result<Evaluator, EmulationError> {
        let mut pairs = Vec::new();
        for l in [Lang::Source, Lang::Target] {
            let count = (universe.contexts(l).len() * universe.programs(l).len()) as u128;
            if count > ceilings.pairs {
                return Err(EmulationError::TooLarge {
                    what: format!("{l:?} context-program pairs").to_lowercase(),
                    count,
                    ceiling: ceilings.pairs,
                });
            }
            let runs = count * universe.envs.len() as u128 * universe.grid.len() as u128;
            if runs > ceilings.runs {
                return Err(EmulationError::TooLarge {
                    what: format!("{l:?} environment runs").to_lowercase(),
                    count: runs,
                    ceiling: ceilings.runs,
                });
            }
            for c in 0..universe.contexts(l).len() {
                for p in 0..universe.programs(l).len() {
                    pairs.push((l, c, p));
                }
            }
        }
        let built: Vec<(Pair, Cell)> = pairs
            .par_iter()
            .map(|&(l, c, p)| {
                let (ctx, prg) = (&universe.contexts(l)[c], &universe.programs(l)[p]);
                let label = format!("{}|{}", ctx.name, prg.name);
                let wrap = |source: ModelError| EmulationError::Model {
                    pair: label.clone(),
                    source,
                };
                let w = link_pair(&ctx.program, &prg.program).map_err(|e| wrap(e.into()))?;
                let exe = Executable::new(&w).map_err(wrap)?;
                let admissible =
                    check_predicate(&exe, &universe.envs, &universe.grid, universe.budget(l))
                        .map_err(wrap)?;
                let mut behavior = behav(
                    &exe,
                    universe.envs.clone(),
                    &universe.grid,
                    Budget::Unbounded,
                )
                .map_err(wrap)?;
                behavior.label = label.clone();
                Ok((
                    (l, c, p),
                    Cell {
                        behavior,
                        admissible,
                    },
                ))
            })
            .collect::<Result<_, EmulationError>>()?;
        Ok(Evaluator {
            universe,
            cells: built.into_iter().collect(),
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn behavior(&self, x: Pair) -> &Behavior {
        &self.cells[&x].behavior
    }

    /// The language predicate on one pair.
    pub fn admissible(&self, x: Pair) -> bool {
        self.cells[&x].admissible
    }

    pub fn label(&self, x: Pair) -> &str {
        &self.cells[&x].behavior.label
    }

    /// `behav(x) ≡ behav(y)` under `kind`.
    pub fn related(&self, kind: &EquivKind, x: Pair, y: Pair) -> Result<bool, EmulationError> {
        let key = (kind.to_string(), x, y);
        if let Some(&v) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(v);
        }
        let v = compare_behaviors(self.behavior(x), self.behavior(y), kind)?.holds;
        self.memo.lock().expect("memo lock").insert(key, v);
        Ok(v)
    }

    pub fn program_index(&self, l: Lang, name: &str) -> Result<usize, EmulationError> {
        self.universe
            .programs(l)
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| EmulationError::Unknown {
                kind: "program",
                name: name.to_string(),
            })
    }
}
