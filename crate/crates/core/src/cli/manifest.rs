//! Manifests: which model files play which part, and how to compare them.
//!
//! One directive per line, `#` starts a comment:
//!
//! ```text
//! name wireguard
//! protocol wg_real.ocl
//! functionality wg_func.ocl
//! attacker wg_dummy.ocl
//! simulator wg_sim.ocl
//! grid 1..3
//! budget 8,1,40
//! equiv comp:c=1,N=0
//! class bounded depth=2 view=full calls=all
//! ```
//!
//! Universes for compiler checks use `source-program`, `target-program`,
//! `source-context`, `target-context`, `source-budget`, `target-budget`,
//! `compiler A->B ...` and `class alphabet depth=D calls=.. responses=..`.
//! File paths are relative to the manifest.

use crate::behavior::{Action, EnvAlphabet, Obs, View};
use crate::equivalence::{CallSpace, EquivKind};
use crate::semantics::Budget;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassDecl {
    Bounded {
        depth: usize,
        view: View,
        calls: CallSpace,
    },
    /// Environment files.
    Explicit(Vec<PathBuf>),
    Alphabet {
        depth: usize,
        alphabet: EnvAlphabet,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    pub dir: PathBuf,
    pub name: String,
    pub protocol: Option<PathBuf>,
    pub functionality: Option<PathBuf>,
    pub attackers: Vec<PathBuf>,
    pub simulators: Vec<PathBuf>,
    pub source_programs: Vec<PathBuf>,
    pub target_programs: Vec<PathBuf>,
    pub source_contexts: Vec<PathBuf>,
    pub target_contexts: Vec<PathBuf>,
    /// Compiler as `(source program name, target program name)` pairs.
    pub compiler: Vec<(String, String)>,
    pub grid: Vec<u32>,
    pub real_budget: Option<Budget>,
    pub ideal_budget: Option<Budget>,
    pub source_budget: Option<Budget>,
    pub target_budget: Option<Budget>,
    pub equiv: Option<EquivKind>,
    pub class: Option<ClassDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ManifestError {
    pub line: usize,
    pub message: String,
}

/// `1..4` (inclusive) or `1,2,5`.
pub fn parse_grid(s: &str) -> Option<Vec<u32>> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u32, u32) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
        return (1 <= a && a <= b).then(|| (a..=b).collect());
    }
    let mut g: Vec<u32> = s
        .split(',')
        .map(|x| x.trim().parse().ok())
        .collect::<Option<_>>()?;
    g.sort();
    g.dedup();
    (!g.is_empty() && g[0] >= 1).then_some(g)
}

fn parse_view(s: &str) -> Option<View> {
    match s {
        "full" => Some(View::Full),
        k => k.parse().ok().map(View::Prefix),
    }
}

fn keyvals(words: &[&str]) -> Vec<(String, String)> {
    words
        .iter()
        .filter_map(|w| {
            w.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
        })
        .collect()
}

fn parse_class(words: &[&str], dir: &Path) -> Option<ClassDecl> {
    let (kind, rest) = words.split_first()?;
    let kv = keyvals(rest);
    let get = |k: &str| kv.iter().find(|(x, _)| x == k).map(|(_, v)| v.as_str());
    let list = |v: &str| -> Option<Vec<String>> {
        Some(v.split(';').map(|x| x.trim().to_string()).collect())
    };
    match *kind {
        "bounded" => {
            let calls = match get("calls")? {
                "all" => CallSpace::AllArgs,
                v => CallSpace::Fixed(
                    list(v)?
                        .iter()
                        .map(|a| Action::parse(a))
                        .collect::<Option<_>>()?,
                ),
            };
            Some(ClassDecl::Bounded {
                depth: get("depth")?.parse().ok()?,
                view: parse_view(get("view").unwrap_or("full"))?,
                calls,
            })
        }
        "explicit" => (!rest.is_empty())
            .then(|| ClassDecl::Explicit(rest.iter().map(|f| dir.join(f)).collect())),
        "alphabet" => Some(ClassDecl::Alphabet {
            depth: get("depth")?.parse().ok()?,
            alphabet: EnvAlphabet {
                calls: list(get("calls")?)?
                    .iter()
                    .map(|a| Action::parse(a))
                    .collect::<Option<_>>()?,
                responses: list(get("responses")?)?
                    .iter()
                    .map(|o| Obs::parse(o))
                    .collect::<Option<_>>()?,
            },
        }),
        _ => None,
    }
}

impl Manifest {
    pub fn parse(text: &str, dir: &Path) -> Result<Manifest, ManifestError> {
        let mut m = Manifest {
            dir: dir.to_path_buf(),
            ..Manifest::default()
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: &str| ManifestError {
                line: i + 1,
                message: message.to_string(),
            };
            let words: Vec<&str> = line.split_whitespace().collect();
            let (key, rest) = words.split_first().expect("line is not empty");
            let one = || -> Result<&str, ManifestError> {
                match rest {
                    [x] => Ok(x),
                    _ => Err(bad(&format!("`{key}` takes one value"))),
                }
            };
            let path = || one().map(|p| dir.join(p));
            let budget = || one().and_then(|b| Budget::parse(b).ok_or_else(|| bad("bad budget")));
            match *key {
                "name" => m.name = one()?.to_string(),
                "protocol" => m.protocol = Some(path()?),
                "functionality" => m.functionality = Some(path()?),
                "attacker" => m.attackers.push(path()?),
                "simulator" => m.simulators.push(path()?),
                "source-program" => m.source_programs.push(path()?),
                "target-program" => m.target_programs.push(path()?),
                "source-context" => m.source_contexts.push(path()?),
                "target-context" => m.target_contexts.push(path()?),
                "compiler" => {
                    for w in rest {
                        let (a, b) = w.split_once("->").ok_or_else(|| bad("expected `A->B`"))?;
                        m.compiler.push((a.to_string(), b.to_string()));
                    }
                }
                "grid" => m.grid = parse_grid(one()?).ok_or_else(|| bad("bad grid"))?,
                "budget" => {
                    let b = budget()?;
                    m.real_budget = Some(b);
                    m.ideal_budget = Some(b);
                    m.source_budget = Some(b);
                    m.target_budget = Some(b);
                }
                "real-budget" => m.real_budget = Some(budget()?),
                "ideal-budget" => m.ideal_budget = Some(budget()?),
                "source-budget" => m.source_budget = Some(budget()?),
                "target-budget" => m.target_budget = Some(budget()?),
                "equiv" => {
                    m.equiv = Some(EquivKind::parse(one()?).map_err(|e| bad(&e.to_string()))?)
                }
                "class" => {
                    m.class =
                        Some(parse_class(rest, dir).ok_or_else(|| bad("bad environment class"))?)
                }
                _ => return Err(bad(&format!("unknown directive `{key}`"))),
            }
        }
        if m.grid.is_empty() {
            m.grid = vec![1, 2];
        }
        Ok(m)
    }

    /// Every model file the manifest mentions, in declaration order.
    pub fn model_files(&self) -> Vec<PathBuf> {
        let mut v: Vec<PathBuf> = Vec::new();
        v.extend(self.protocol.clone());
        v.extend(self.functionality.clone());
        for list in [
            &self.attackers,
            &self.simulators,
            &self.source_programs,
            &self.target_programs,
            &self.source_contexts,
            &self.target_contexts,
        ] {
            for p in list {
                if !v.contains(p) {
                    v.push(p.clone());
                }
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_directives() {
        let m = Manifest::parse(
            "name w # comment\nprotocol a.ocl\nattacker b.ocl\ngrid 1..3\nbudget 8,1,40\nequiv comp:c=1,N=0\nclass bounded depth=2 view=2 calls=Commit(0);Observe()\n",
            Path::new("d"),
        )
        .unwrap();
        assert_eq!(m.protocol, Some(PathBuf::from("d/a.ocl")));
        assert_eq!(m.grid, vec![1, 2, 3]);
        assert_eq!(m.target_budget, Some(Budget::poly(8, 1, 40)));
        let Some(ClassDecl::Bounded {
            calls: CallSpace::Fixed(c),
            view,
            ..
        }) = m.class
        else {
            panic!()
        };
        assert_eq!(view, View::Prefix(2));
        assert_eq!(
            c[0],
            Action::new("Commit", vec![crate::bits::Bits::new(0, 1)])
        );
        assert!(Manifest::parse("grid 0..2", Path::new(".")).is_err());
        assert!(Manifest::parse("frobnicate x", Path::new(".")).is_err());
        assert_eq!(parse_grid("3,1,1"), Some(vec![1, 3]));
    }
}
