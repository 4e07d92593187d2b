//! Resolved form of a linked program: variables become slots, names become indices.

use crate::bits::{Bits, Width};
use crate::lang::validate::index_width;
use crate::lang::{BinOp, Expr, OracleKind, Pattern, Role, Stmt, WholeProgram};
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("oracle `{0}` is not exported")]
    NotExported(String),
    #[error("`{oracle}` takes {expected} arguments, got {got}")]
    Arity {
        oracle: String,
        expected: usize,
        got: usize,
    },
    #[error("argument {index} of `{oracle}` has width {got}, expected {expected}")]
    ArgWidth {
        oracle: String,
        index: usize,
        expected: u32,
        got: u32,
    },
    #[error(transparent)]
    Link(#[from] crate::lang::LinkError),
    #[error("cannot resolve {0}")]
    Unresolved(String),
    #[error("oracle `{0}` can run itself")]
    RecursiveRun(String),
    #[error("evaluation error in `{oracle}`: {message}")]
    Eval { oracle: String, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IIndex {
    /// Instance 1 (`x[]`).
    One,
    /// The instance the current oracle runs as.
    Current,
    /// Instance named by a find index held in a slot.
    Slot(u32),
}

#[derive(Clone, Debug)]
pub enum IExpr {
    Local(u32),
    /// Replication index of the running instance, as a value.
    Instance(u32),
    Foreign {
        oracle: u32,
        slot: u32,
        index: IIndex,
    },
    Lit(Bits),
    Zero(Width),
    Not(Box<IExpr>),
    Bin(BinOp, Box<IExpr>, Box<IExpr>),
    Trunc(Width, Box<IExpr>),
    Inc(u64, Box<IExpr>),
    Defined(Vec<(u32, u32, IIndex)>),
    Prg(Box<IExpr>),
    Prf(Width, Box<IExpr>, Box<IExpr>),
}

#[derive(Clone, Debug)]
pub enum IPat {
    Bind(u32),
    Match(IExpr),
}

#[derive(Clone, Debug)]
pub enum IStmt {
    Sample {
        slot: u32,
        width: Width,
        next: Box<IStmt>,
    },
    Let {
        slot: u32,
        expr: IExpr,
        next: Box<IStmt>,
    },
    Insert {
        table: u32,
        values: Vec<IExpr>,
        next: Box<IStmt>,
    },
    Get {
        table: u32,
        pattern: Vec<IPat>,
        cond: Option<IExpr>,
        then: Box<IStmt>,
        els: Box<IStmt>,
    },
    Find {
        slot: u32,
        bound: Width,
        cond: IExpr,
        then: Box<IStmt>,
        els: Box<IStmt>,
    },
    If {
        cond: IExpr,
        then: Box<IStmt>,
        els: Box<IStmt>,
    },
    Return(Vec<IExpr>),
    Yield,
    Run {
        oracle: u32,
        args: Vec<IExpr>,
    },
}

#[derive(Clone, Debug)]
pub struct IOracle {
    pub name: String,
    pub role: Role,
    pub init: bool,
    pub replicated: bool,
    pub bound: u32,
    pub params: Vec<(u32, Width)>,
    pub slot_names: Vec<String>,
    pub body: IStmt,
}

impl IOracle {
    pub fn nslots(&self) -> usize {
        self.slot_names.len()
    }
}

#[derive(Clone, Debug)]
pub struct ITable {
    pub role: Role,
    pub name: String,
    pub columns: Vec<Width>,
}

#[derive(Clone, Debug)]
pub struct Ir {
    pub oracles: Vec<IOracle>,
    pub tables: Vec<ITable>,
    pub exports: Vec<(Arc<str>, u32)>,
    pub inits: Vec<u32>,
}

impl Ir {
    pub fn export(&self, name: &str) -> Option<u32> {
        self.exports
            .iter()
            .find(|(n, _)| &**n == name)
            .map(|(_, o)| *o)
    }
}

struct Compiler<'a> {
    w: &'a WholeProgram,
    /// (component, oracle) -> global index
    global: HashMap<(usize, usize), u32>,
    table_base: Vec<usize>,
}

struct Scope {
    comp: usize,
    oracle: String,
    replication: Option<String>,
    rep_width: u32,
    slots: HashMap<String, u32>,
    names: Vec<String>,
    find_indices: Vec<String>,
}

impl Scope {
    fn slot(&mut self, name: &str) -> u32 {
        if let Some(s) = self.slots.get(name) {
            return *s;
        }
        let s = self.names.len() as u32;
        self.names.push(name.to_string());
        self.slots.insert(name.to_string(), s);
        s
    }
}

pub fn compile(w: &WholeProgram) -> Result<Ir, ModelError> {
    let w = w.clone().closed()?;
    let mut global = HashMap::new();
    let mut g = 0u32;
    for (ci, c) in w.components.iter().enumerate() {
        for oi in 0..c.program.oracles.len() {
            global.insert((ci, oi), g);
            g += 1;
        }
    }
    let mut table_base = Vec::new();
    let mut tables = Vec::new();
    for c in &w.components {
        table_base.push(tables.len());
        for t in &c.program.tables {
            tables.push(ITable {
                role: c.role,
                name: t.name.clone(),
                columns: t.columns.clone(),
            });
        }
    }
    let comp = Compiler {
        w: &w,
        global,
        table_base,
    };
    let mut oracles = Vec::new();
    let mut inits = Vec::new();
    for (ci, c) in w.components.iter().enumerate() {
        for o in &c.program.oracles {
            let bound = c.program.bound_of(o);
            let mut scope = Scope {
                comp: ci,
                oracle: o.name.clone(),
                replication: o.replication.clone(),
                rep_width: index_width(bound),
                slots: HashMap::new(),
                names: Vec::new(),
                find_indices: Vec::new(),
            };
            let params = o
                .params
                .iter()
                .map(|p| (scope.slot(&p.name), p.width))
                .collect();
            let body = comp.stmt(&o.body, &mut scope)?;
            if o.kind == OracleKind::Init {
                inits.push(oracles.len() as u32);
            }
            oracles.push(IOracle {
                name: o.name.clone(),
                role: c.role,
                init: o.kind == OracleKind::Init,
                replicated: o.replication.is_some(),
                bound,
                params,
                slot_names: scope.names,
                body,
            });
        }
    }
    check_acyclic(&oracles)?;
    let exports = w
        .exports()
        .into_iter()
        .map(|(name, r)| (Arc::from(name.as_str()), comp.global[&(r.comp, r.oracle)]))
        .collect();
    Ok(Ir {
        oracles,
        tables,
        exports,
        inits,
    })
}

fn runs_of(s: &IStmt, out: &mut Vec<u32>) {
    match s {
        IStmt::Sample { next, .. } | IStmt::Let { next, .. } | IStmt::Insert { next, .. } => {
            runs_of(next, out)
        }
        IStmt::Get { then, els, .. }
        | IStmt::Find { then, els, .. }
        | IStmt::If { then, els, .. } => {
            runs_of(then, out);
            runs_of(els, out);
        }
        IStmt::Run { oracle, .. } => out.push(*oracle),
        IStmt::Return(_) | IStmt::Yield => {}
    }
}

fn check_acyclic(oracles: &[IOracle]) -> Result<(), ModelError> {
    let edges: Vec<Vec<u32>> = oracles
        .iter()
        .map(|o| {
            let mut v = Vec::new();
            runs_of(&o.body, &mut v);
            v
        })
        .collect();
    // 0 unvisited, 1 on stack, 2 done
    fn visit(i: usize, edges: &[Vec<u32>], mark: &mut [u8]) -> Option<usize> {
        mark[i] = 1;
        for &j in &edges[i] {
            match mark[j as usize] {
                1 => return Some(j as usize),
                0 => {
                    if let Some(c) = visit(j as usize, edges, mark) {
                        return Some(c);
                    }
                }
                _ => {}
            }
        }
        mark[i] = 2;
        None
    }
    let mut mark = vec![0u8; oracles.len()];
    for i in 0..oracles.len() {
        if mark[i] == 0 {
            if let Some(c) = visit(i, &edges, &mut mark) {
                return Err(ModelError::RecursiveRun(oracles[c].name.clone()));
            }
        }
    }
    Ok(())
}

impl<'a> Compiler<'a> {
    fn table(&self, comp: usize, name: &str) -> Result<u32, ModelError> {
        let prog = &self.w.components[comp].program;
        let i = prog
            .tables
            .iter()
            .position(|t| t.name == name)
            .ok_or_else(|| ModelError::Unresolved(format!("table `{name}`")))?;
        Ok((self.table_base[comp] + i) as u32)
    }

    fn stmt(&self, s: &Stmt, sc: &mut Scope) -> Result<IStmt, ModelError> {
        Ok(match s {
            Stmt::Sample { var, width, next } => IStmt::Sample {
                slot: sc.slot(var),
                width: *width,
                next: Box::new(self.stmt(next, sc)?),
            },
            Stmt::Let { var, expr, next } => {
                let expr = self.expr(expr, sc)?;
                IStmt::Let {
                    slot: sc.slot(var),
                    expr,
                    next: Box::new(self.stmt(next, sc)?),
                }
            }
            Stmt::Insert {
                table,
                values,
                next,
            } => IStmt::Insert {
                table: self.table(sc.comp, table)?,
                values: values
                    .iter()
                    .map(|e| self.expr(e, sc))
                    .collect::<Result<_, _>>()?,
                next: Box::new(self.stmt(next, sc)?),
            },
            Stmt::Get {
                table,
                pattern,
                cond,
                then,
                els,
            } => {
                let mut pats = Vec::new();
                for p in pattern {
                    pats.push(match p {
                        Pattern::Match(e) => IPat::Match(self.expr(e, sc)?),
                        Pattern::Bind(v) => IPat::Bind(sc.slot(v)),
                    });
                }
                IStmt::Get {
                    table: self.table(sc.comp, table)?,
                    pattern: pats,
                    cond: cond.as_ref().map(|c| self.expr(c, sc)).transpose()?,
                    then: Box::new(self.stmt(then, sc)?),
                    els: Box::new(self.stmt(els, sc)?),
                }
            }
            Stmt::Find {
                index,
                bound,
                cond,
                then,
                els,
            } => {
                let slot = sc.slot(index);
                sc.find_indices.push(index.clone());
                let cond = self.expr(cond, sc)?;
                let then = self.stmt(then, sc)?;
                sc.find_indices.pop();
                IStmt::Find {
                    slot,
                    bound: *bound,
                    cond,
                    then: Box::new(then),
                    els: Box::new(self.stmt(els, sc)?),
                }
            }
            Stmt::If { cond, then, els } => IStmt::If {
                cond: self.expr(cond, sc)?,
                then: Box::new(self.stmt(then, sc)?),
                els: Box::new(self.stmt(els, sc)?),
            },
            Stmt::Return(es) => IStmt::Return(
                es.iter()
                    .map(|e| self.expr(e, sc))
                    .collect::<Result<_, _>>()?,
            ),
            Stmt::Yield => IStmt::Yield,
            Stmt::Run { oracle, args } => {
                let r = self
                    .w
                    .resolve_oracle(sc.comp, oracle)
                    .ok_or_else(|| ModelError::Unresolved(format!("oracle `{oracle}`")))?;
                IStmt::Run {
                    oracle: self.global[&(r.comp, r.oracle)],
                    args: args
                        .iter()
                        .map(|e| self.expr(e, sc))
                        .collect::<Result<_, _>>()?,
                }
            }
        })
    }

    fn index(&self, ix: &Option<String>, sc: &Scope) -> Result<IIndex, ModelError> {
        match ix {
            None => Ok(IIndex::One),
            Some(i) if sc.find_indices.contains(i) => Ok(IIndex::Slot(sc.slots[i])),
            Some(i) if sc.replication.as_deref() == Some(i.as_str()) => Ok(IIndex::Current),
            Some(i) => Err(ModelError::Unresolved(format!(
                "index `{i}` in `{}`",
                sc.oracle
            ))),
        }
    }

    fn foreign(
        &self,
        var: &str,
        ix: &Option<String>,
        sc: &Scope,
    ) -> Result<(u32, u32, IIndex), ModelError> {
        let r = self.w.resolve_read(sc.comp, var).ok_or_else(|| {
            ModelError::Unresolved(format!("foreign read of `{var}` in `{}`", sc.oracle))
        })?;
        let target = self.global[&(r.comp, r.oracle)];
        let decl = self.w.oracle(r);
        let slot = slot_of(decl, var)
            .ok_or_else(|| ModelError::Unresolved(format!("variable `{var}`")))?;
        Ok((target, slot, self.index(ix, sc)?))
    }

    fn expr(&self, e: &Expr, sc: &mut Scope) -> Result<IExpr, ModelError> {
        Ok(match e {
            Expr::Var(v) => match sc.slots.get(v) {
                Some(s) => IExpr::Local(*s),
                None if sc.replication.as_deref() == Some(v.as_str()) => {
                    IExpr::Instance(sc.rep_width)
                }
                None => {
                    return Err(ModelError::Unresolved(format!(
                        "variable `{v}` in `{}`",
                        sc.oracle
                    )))
                }
            },
            Expr::Foreign { var, index, .. } => {
                let (oracle, slot, index) = self.foreign(var, index, sc)?;
                IExpr::Foreign {
                    oracle,
                    slot,
                    index,
                }
            }
            Expr::Lit(b) => IExpr::Lit(*b),
            Expr::Zero(w) => IExpr::Zero(*w),
            Expr::Not(x) => IExpr::Not(Box::new(self.expr(x, sc)?)),
            Expr::Bin(op, a, b) => IExpr::Bin(
                *op,
                Box::new(self.expr(a, sc)?),
                Box::new(self.expr(b, sc)?),
            ),
            Expr::Trunc(w, x) => IExpr::Trunc(*w, Box::new(self.expr(x, sc)?)),
            Expr::Inc(m, x) => IExpr::Inc(*m, Box::new(self.expr(x, sc)?)),
            Expr::Defined(refs) => IExpr::Defined(
                refs.iter()
                    .map(|r| self.foreign(&r.var, &r.index, sc))
                    .collect::<Result<_, _>>()?,
            ),
            Expr::Prim { name, width, args } => match (name.as_str(), width, args.as_slice()) {
                ("prg", None, [s]) => IExpr::Prg(Box::new(self.expr(s, sc)?)),
                ("prf", Some(w), [k, x]) => {
                    IExpr::Prf(*w, Box::new(self.expr(k, sc)?), Box::new(self.expr(x, sc)?))
                }
                _ => return Err(ModelError::Unresolved(format!("primitive `{name}`"))),
            },
        })
    }
}

/// Slot a variable receives when its oracle is compiled (mirrors `Scope::slot` order).
fn slot_of(decl: &crate::lang::OracleDecl, var: &str) -> Option<u32> {
    let mut names: Vec<String> = decl.params.iter().map(|p| p.name.clone()).collect();
    slot_order(&decl.body, &mut names);
    names.iter().position(|n| n == var).map(|p| p as u32)
}

fn push_unique(names: &mut Vec<String>, v: &str) {
    if !names.iter().any(|n| n == v) {
        names.push(v.to_string());
    }
}

fn slot_order(s: &Stmt, names: &mut Vec<String>) {
    match s {
        Stmt::Sample { var, next, .. } => {
            push_unique(names, var);
            slot_order(next, names);
        }
        Stmt::Let { var, next, .. } => {
            push_unique(names, var);
            slot_order(next, names);
        }
        Stmt::Insert { next, .. } => slot_order(next, names),
        Stmt::Get {
            pattern, then, els, ..
        } => {
            for p in pattern {
                if let Pattern::Bind(v) = p {
                    push_unique(names, v);
                }
            }
            slot_order(then, names);
            slot_order(els, names);
        }
        Stmt::Find {
            index, then, els, ..
        } => {
            push_unique(names, index);
            slot_order(then, names);
            slot_order(els, names);
        }
        Stmt::If { then, els, .. } => {
            slot_order(then, names);
            slot_order(els, names);
        }
        _ => {}
    }
}
