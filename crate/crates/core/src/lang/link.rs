//! Linking programs into a whole program.
//!
//! Each linked program keeps its own role name, table namespace and
//! variable namespace. `run` targets and `reads` entries resolve to the
//! program's own oracles first and to the partner programs otherwise.

use super::ast::*;
use super::validate::defined_vars;
use std::fmt;
use thiserror::Error;

/// Which side of a link a program sits on. Events are attributed to roles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Context,
    Program,
}

impl Role {
    pub fn tag(self) -> &'static str {
        match self {
            Role::Context => "ctx",
            Role::Program => "prg",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Component {
    pub role: Role,
    pub program: OracleProgram,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct WholeProgram {
    pub components: Vec<Component>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LinkError {
    #[error("oracle `{oracle}` is exported by both `{left}` and `{right}`")]
    ExportCollision {
        oracle: String,
        left: Role,
        right: Role,
    },
    #[error("role `{0}` appears twice")]
    DuplicateRole(Role),
    #[error("`{role}` runs unknown oracle `{oracle}`")]
    UnresolvedRun { role: Role, oracle: String },
    #[error("`{role}` reads ({oracle}, {var}) but no linked oracle `{oracle}` defines `{var}`")]
    UnresolvedRead {
        role: Role,
        oracle: String,
        var: String,
    },
}

/// Location of an oracle: component index and oracle index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OracleRef {
    pub comp: usize,
    pub oracle: usize,
}

impl WholeProgram {
    /// A single program in the program role.
    pub fn single(program: OracleProgram) -> WholeProgram {
        WholeProgram::with_role(Role::Program, program)
    }

    pub fn with_role(role: Role, program: OracleProgram) -> WholeProgram {
        let components = if program.oracles.is_empty() {
            Vec::new()
        } else {
            vec![Component { role, program }]
        };
        WholeProgram { components }
    }

    pub fn roles(&self) -> Vec<Role> {
        self.components.iter().map(|c| c.role).collect()
    }

    /// Name used in reports: `ctx_name|prg_name`.
    pub fn label(&self) -> String {
        let names: Vec<&str> = self
            .components
            .iter()
            .map(|c| c.program.name.as_str())
            .collect();
        names.join("|")
    }

    pub fn oracle(&self, r: OracleRef) -> &OracleDecl {
        &self.components[r.comp].program.oracles[r.oracle]
    }

    /// Exported oracles in component order.
    pub fn exports(&self) -> Vec<(String, OracleRef)> {
        let mut out = Vec::new();
        for (ci, c) in self.components.iter().enumerate() {
            for e in &c.program.exports {
                if let Some(oi) = c.program.oracles.iter().position(|o| o.name == *e) {
                    out.push((
                        e.clone(),
                        OracleRef {
                            comp: ci,
                            oracle: oi,
                        },
                    ));
                }
            }
        }
        out
    }

    pub fn export(&self, name: &str) -> Option<OracleRef> {
        self.exports()
            .into_iter()
            .find(|(n, _)| n == name)
            .map(|(_, r)| r)
    }

    /// Resolves an oracle name as seen from component `from`.
    pub fn resolve_oracle(&self, from: usize, name: &str) -> Option<OracleRef> {
        let find = |ci: usize| {
            self.components[ci]
                .program
                .oracles
                .iter()
                .position(|o| o.name == name)
                .map(|oi| OracleRef {
                    comp: ci,
                    oracle: oi,
                })
        };
        find(from).or_else(|| {
            (0..self.components.len())
                .filter(|&c| c != from)
                .find_map(find)
        })
    }

    /// Resolves a foreign variable read in component `from` to its defining oracle.
    pub fn resolve_read(&self, from: usize, var: &str) -> Option<OracleRef> {
        let c = &self.components[from];
        let perm = c.program.reads.iter().find(|r| r.var == var)?;
        let r = self.resolve_oracle(from, &perm.oracle)?;
        let target = &self.components[r.comp].program;
        defined_vars(target, self.oracle(r))
            .iter()
            .any(|(v, _)| v == var)
            .then_some(r)
    }

    fn check(&self) -> Result<(), LinkError> {
        for (ci, c) in self.components.iter().enumerate() {
            for o in &c.program.oracles {
                let mut targets = Vec::new();
                o.body.run_targets(&mut targets);
                for t in targets {
                    if self.resolve_oracle(ci, &t).is_none() {
                        return Err(LinkError::UnresolvedRun {
                            role: c.role,
                            oracle: t,
                        });
                    }
                }
            }
            for r in &c.program.reads {
                let ok = self.resolve_oracle(ci, &r.oracle).is_some_and(|t| {
                    defined_vars(&self.components[t.comp].program, self.oracle(t))
                        .iter()
                        .any(|(v, _)| *v == r.var)
                });
                if !ok {
                    return Err(LinkError::UnresolvedRead {
                        role: c.role,
                        oracle: r.oracle.clone(),
                        var: r.var.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Checks that every `run` and `reads` resolves without a partner.
    pub fn closed(self) -> Result<WholeProgram, LinkError> {
        self.check()?;
        Ok(self)
    }
}

/// Links two whole programs. Exports are unioned; an oracle exported by both sides is rejected.
pub fn link(a: &WholeProgram, b: &WholeProgram) -> Result<WholeProgram, LinkError> {
    let mut components = a.components.clone();
    for c in &b.components {
        if components.iter().any(|x| x.role == c.role) {
            return Err(LinkError::DuplicateRole(c.role));
        }
        for e in &c.program.exports {
            if let Some(x) = components.iter().find(|x| x.program.exports.contains(e)) {
                return Err(LinkError::ExportCollision {
                    oracle: e.clone(),
                    left: x.role,
                    right: c.role,
                });
            }
        }
        components.push(c.clone());
    }
    Ok(WholeProgram { components })
}

/// Links a context with a program and checks the result is closed.
pub fn link_pair(ctx: &OracleProgram, prg: &OracleProgram) -> Result<WholeProgram, LinkError> {
    link(
        &WholeProgram::with_role(Role::Context, ctx.clone()),
        &WholeProgram::with_role(Role::Program, prg.clone()),
    )?
    .closed()
}

impl fmt::Display for WholeProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.label())
    }
}
