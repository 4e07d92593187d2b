//! Abstract syntax of the oracle-process language.

use crate::bits::{Bits, Width};

/// Source position. Spans never take part in structural equality.
#[derive(Clone, Copy, Debug, Default, Eq, Hash)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _other: &Span) -> bool {
        true
    }
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OracleProgram {
    pub name: String,
    pub replications: Vec<Replication>,
    pub oracles: Vec<OracleDecl>,
    pub tables: Vec<TableDecl>,
    pub exports: Vec<String>,
    pub reads: Vec<ReadPerm>,
}

/// `foreach index <= bound do (...)`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Replication {
    pub index: String,
    pub bound: u32,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TableDecl {
    pub name: String,
    pub columns: Vec<Width>,
    pub span: Span,
}

/// Permission to read `var` as defined by instances of `oracle`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ReadPerm {
    pub oracle: String,
    pub var: String,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OracleKind {
    /// Runs once, before the environment acts.
    Init,
    /// Callable by the environment (if exported) or via `run`.
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OracleDecl {
    pub name: String,
    pub kind: OracleKind,
    /// Index variable of the enclosing `foreach`, if any.
    pub replication: Option<String>,
    pub params: Vec<Param>,
    pub body: Stmt,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Param {
    pub name: String,
    pub width: Width,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Stmt {
    Sample {
        var: String,
        width: Width,
        next: Box<Stmt>,
    },
    Let {
        var: String,
        expr: Expr,
        next: Box<Stmt>,
    },
    Insert {
        table: String,
        values: Vec<Expr>,
        next: Box<Stmt>,
    },
    Get {
        table: String,
        pattern: Vec<Pattern>,
        cond: Option<Expr>,
        then: Box<Stmt>,
        els: Box<Stmt>,
    },
    Find {
        index: String,
        bound: Width,
        cond: Expr,
        then: Box<Stmt>,
        els: Box<Stmt>,
    },
    If {
        cond: Expr,
        then: Box<Stmt>,
        els: Box<Stmt>,
    },
    Return(Vec<Expr>),
    Yield,
    Run {
        oracle: String,
        args: Vec<Expr>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    Bind(String),
    Match(Expr),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Xor,
    Concat,
    Eq,
    Neq,
    And,
    Or,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    /// Local variable, parameter, or replication index.
    Var(String),
    /// `var[index]` (or `var[]` for a non-replicated definer).
    Foreign {
        var: String,
        index: Option<String>,
        span: Span,
    },
    Lit(Bits),
    Zero(Width),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// Leading `width` bits.
    Trunc(Width, Box<Expr>),
    /// Counter increment modulo the given bound.
    Inc(u64, Box<Expr>),
    Defined(Vec<ForeignRef>),
    /// Built-in primitive application, with an optional output width.
    Prim {
        name: String,
        width: Option<Width>,
        args: Vec<Expr>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ForeignRef {
    pub var: String,
    pub index: Option<String>,
    pub span: Span,
}

impl Expr {
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    /// Visits every foreign reference (including those inside `defined`).
    pub fn foreign_refs(&self, out: &mut Vec<ForeignRef>) {
        match self {
            Expr::Foreign { var, index, span } => out.push(ForeignRef {
                var: var.clone(),
                index: index.clone(),
                span: *span,
            }),
            Expr::Defined(refs) => out.extend(refs.iter().cloned()),
            Expr::Not(e) | Expr::Trunc(_, e) | Expr::Inc(_, e) => e.foreign_refs(out),
            Expr::Bin(_, a, b) => {
                a.foreign_refs(out);
                b.foreign_refs(out);
            }
            Expr::Prim { args, .. } => args.iter().for_each(|a| a.foreign_refs(out)),
            Expr::Var(_) | Expr::Lit(_) | Expr::Zero(_) => {}
        }
    }

    pub fn local_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Var(v) => out.push(v.clone()),
            Expr::Not(e) | Expr::Trunc(_, e) | Expr::Inc(_, e) => e.local_vars(out),
            Expr::Bin(_, a, b) => {
                a.local_vars(out);
                b.local_vars(out);
            }
            Expr::Prim { args, .. } => args.iter().for_each(|a| a.local_vars(out)),
            _ => {}
        }
    }
}

impl Stmt {
    /// Calls `f` on every expression in this statement tree.
    pub fn walk_exprs<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        match self {
            Stmt::Sample { next, .. } => next.walk_exprs(f),
            Stmt::Let { expr, next, .. } => {
                f(expr);
                next.walk_exprs(f);
            }
            Stmt::Insert { values, next, .. } => {
                values.iter().for_each(&mut *f);
                next.walk_exprs(f);
            }
            Stmt::Get {
                pattern,
                cond,
                then,
                els,
                ..
            } => {
                for p in pattern {
                    if let Pattern::Match(e) = p {
                        f(e);
                    }
                }
                if let Some(c) = cond {
                    f(c);
                }
                then.walk_exprs(f);
                els.walk_exprs(f);
            }
            Stmt::Find {
                cond, then, els, ..
            }
            | Stmt::If { cond, then, els } => {
                f(cond);
                then.walk_exprs(f);
                els.walk_exprs(f);
            }
            Stmt::Return(es) | Stmt::Run { args: es, .. } => es.iter().for_each(f),
            Stmt::Yield => {}
        }
    }

    /// Variables bound anywhere in this statement tree (with their binding widths when known).
    pub fn bound_vars(&self, out: &mut Vec<String>) {
        match self {
            Stmt::Sample { var, next, .. } | Stmt::Let { var, next, .. } => {
                out.push(var.clone());
                next.bound_vars(out);
            }
            Stmt::Insert { next, .. } => next.bound_vars(out),
            Stmt::Get {
                pattern, then, els, ..
            } => {
                for p in pattern {
                    if let Pattern::Bind(v) = p {
                        out.push(v.clone());
                    }
                }
                then.bound_vars(out);
                els.bound_vars(out);
            }
            Stmt::Find { then, els, .. } | Stmt::If { then, els, .. } => {
                then.bound_vars(out);
                els.bound_vars(out);
            }
            Stmt::Return(_) | Stmt::Yield | Stmt::Run { .. } => {}
        }
    }

    /// Names of oracles targeted by `run`.
    pub fn run_targets(&self, out: &mut Vec<String>) {
        match self {
            Stmt::Sample { next, .. } | Stmt::Let { next, .. } | Stmt::Insert { next, .. } => {
                next.run_targets(out)
            }
            Stmt::Get { then, els, .. }
            | Stmt::Find { then, els, .. }
            | Stmt::If { then, els, .. } => {
                then.run_targets(out);
                els.run_targets(out);
            }
            Stmt::Run { oracle, .. } => out.push(oracle.clone()),
            Stmt::Return(_) | Stmt::Yield => {}
        }
    }
}

impl OracleProgram {
    pub fn new(name: impl Into<String>) -> Self {
        OracleProgram {
            name: name.into(),
            replications: Vec::new(),
            oracles: Vec::new(),
            tables: Vec::new(),
            exports: Vec::new(),
            reads: Vec::new(),
        }
    }

    /// The program with no oracles; linking with it is the identity.
    pub fn empty() -> Self {
        OracleProgram::new("empty")
    }

    pub fn oracle(&self, name: &str) -> Option<&OracleDecl> {
        self.oracles.iter().find(|o| o.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&TableDecl> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn replication(&self, index: &str) -> Option<&Replication> {
        self.replications.iter().find(|r| r.index == index)
    }

    /// Replication bound of an oracle (1 when not replicated).
    pub fn bound_of(&self, oracle: &OracleDecl) -> u32 {
        oracle
            .replication
            .as_ref()
            .and_then(|r| self.replication(r))
            .map_or(1, |r| r.bound)
    }

    /// Default export list: every non-init oracle that is not only a `run` target.
    pub fn default_exports(&self) -> Vec<String> {
        let mut targets = Vec::new();
        for o in &self.oracles {
            o.body.run_targets(&mut targets);
        }
        self.oracles
            .iter()
            .filter(|o| o.kind == OracleKind::Oracle && !targets.contains(&o.name))
            .map(|o| o.name.clone())
            .collect()
    }
}
