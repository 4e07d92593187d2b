//! Static checks on a single program.

use super::ast::*;
use crate::bits::Width;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn render(&self, file: &str) -> String {
        format!(
            "{file}:{}:{}: {}: {}",
            self.span.line, self.span.col, self.severity, self.message
        )
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

/// Width of a replication or find index used as a value.
pub fn index_width(bound: u32) -> u32 {
    let mut w = 1;
    while (1u64 << w) < bound as u64 {
        w += 1;
    }
    w
}

/// Variables an oracle defines (parameters and bindings) with their widths, when known statically.
pub fn defined_vars(p: &OracleProgram, o: &OracleDecl) -> Vec<(String, Option<Width>)> {
    let mut out: Vec<(String, Option<Width>)> = o
        .params
        .iter()
        .map(|x| (x.name.clone(), Some(x.width)))
        .collect();
    collect_bindings(p, &o.body, &mut out);
    out
}

fn collect_bindings(p: &OracleProgram, s: &Stmt, out: &mut Vec<(String, Option<Width>)>) {
    match s {
        Stmt::Sample { var, width, next } => {
            out.push((var.clone(), Some(*width)));
            collect_bindings(p, next, out);
        }
        Stmt::Let { var, next, .. } => {
            out.push((var.clone(), None));
            collect_bindings(p, next, out);
        }
        Stmt::Insert { next, .. } => collect_bindings(p, next, out),
        Stmt::Get {
            table,
            pattern,
            then,
            els,
            ..
        } => {
            let cols = p
                .table(table)
                .map(|t| t.columns.clone())
                .unwrap_or_default();
            for (i, pat) in pattern.iter().enumerate() {
                if let Pattern::Bind(v) = pat {
                    out.push((v.clone(), cols.get(i).copied()));
                }
            }
            collect_bindings(p, then, out);
            collect_bindings(p, els, out);
        }
        Stmt::Find { then, els, .. } | Stmt::If { then, els, .. } => {
            collect_bindings(p, then, out);
            collect_bindings(p, els, out);
        }
        _ => {}
    }
}

pub fn validate(p: &OracleProgram) -> Vec<Diagnostic> {
    validate_among(p, &[])
}

/// Like [`validate`], but variables that any of `others` reads are not
/// reported as unused.
pub fn validate_among(p: &OracleProgram, others: &[&OracleProgram]) -> Vec<Diagnostic> {
    let mut v = Validator {
        p,
        shared: others
            .iter()
            .flat_map(|q| q.reads.iter().map(|r| (r.oracle.clone(), r.var.clone())))
            .collect(),
        diags: Vec::new(),
    };
    v.run();
    v.diags
        .sort_by_key(|d| (d.span.line, d.span.col, d.severity));
    v.diags
}

struct Binding {
    name: String,
    width: Option<Width>,
    used: bool,
    index: bool,
}

struct Validator<'a> {
    p: &'a OracleProgram,
    shared: Vec<(String, String)>,
    diags: Vec<Diagnostic>,
}

impl<'a> Validator<'a> {
    fn error(&mut self, span: Span, message: String) {
        self.diags.push(Diagnostic {
            severity: Severity::Error,
            span,
            message,
        });
    }

    fn warn(&mut self, span: Span, message: String) {
        self.diags.push(Diagnostic {
            severity: Severity::Warning,
            span,
            message,
        });
    }

    fn run(&mut self) {
        let p = self.p;
        let mut seen: Vec<&str> = Vec::new();
        for o in &p.oracles {
            if seen.contains(&o.name.as_str()) {
                self.error(o.span, format!("duplicate oracle `{}`", o.name));
            }
            seen.push(&o.name);
            if let Some(r) = &o.replication {
                if p.replication(r).is_none() {
                    self.error(o.span, format!("unknown replication index `{r}`"));
                }
            }
        }
        let mut reps: Vec<&str> = Vec::new();
        for r in &p.replications {
            if reps.contains(&r.index.as_str()) {
                self.error(r.span, format!("duplicate replication index `{}`", r.index));
            }
            if r.bound == 0 {
                self.error(
                    r.span,
                    format!("replication bound of `{}` must be positive", r.index),
                );
            }
            reps.push(&r.index);
        }
        let mut tables: Vec<&str> = Vec::new();
        for t in &p.tables {
            if tables.contains(&t.name.as_str()) {
                self.error(t.span, format!("duplicate table `{}`", t.name));
            }
            tables.push(&t.name);
        }
        let first_span = p.oracles.first().map(|o| o.span).unwrap_or_default();
        let mut exported: Vec<&str> = Vec::new();
        for e in &p.exports {
            match p.oracle(e) {
                None => self.error(first_span, format!("exported oracle `{e}` is not declared")),
                Some(o) if o.kind == OracleKind::Init => {
                    self.error(o.span, format!("init block `{e}` cannot be exported"))
                }
                _ => {}
            }
            if exported.contains(&e.as_str()) {
                self.error(first_span, format!("oracle `{e}` exported twice"));
            }
            exported.push(e);
        }
        for r in &p.reads {
            if let Some(o) = p.oracle(&r.oracle) {
                if !defined_vars(p, o).iter().any(|(v, _)| *v == r.var) {
                    self.error(
                        r.span,
                        format!("oracle `{}` defines no variable `{}`", r.oracle, r.var),
                    );
                }
            }
        }
        for o in &p.oracles {
            self.oracle(o);
        }
    }

    fn foreign_width(&self, var: &str) -> Option<Width> {
        let r = self.p.reads.iter().find(|r| r.var == var)?;
        let o = self.p.oracle(&r.oracle)?;
        defined_vars(self.p, o)
            .into_iter()
            .find(|(v, _)| v == var)
            .and_then(|(_, w)| w)
    }

    fn oracle(&mut self, o: &'a OracleDecl) {
        let mut scope: Vec<Binding> = Vec::new();
        if let Some(r) = &o.replication {
            let bound = self.p.replication(r).map_or(1, |x| x.bound);
            scope.push(Binding {
                name: r.clone(),
                width: Some(Width::fixed(index_width(bound))),
                used: true,
                index: true,
            });
        }
        for (i, prm) in o.params.iter().enumerate() {
            if o.params[..i].iter().any(|q| q.name == prm.name) {
                self.error(
                    o.span,
                    format!("duplicate parameter `{}` in `{}`", prm.name, o.name),
                );
            }
            if !prm.width.is_positive() {
                self.error(o.span, format!("parameter `{}` has zero width", prm.name));
            }
            scope.push(Binding {
                name: prm.name.clone(),
                width: Some(prm.width),
                used: false,
                index: false,
            });
        }
        let base = if o.replication.is_some() { 1 } else { 0 };
        self.stmt(o, &o.body, &mut scope);
        let params: Vec<Binding> = scope.drain(base..).collect();
        self.report_unused(o, params);
    }

    fn exported_var(&self, o: &OracleDecl, var: &str) -> bool {
        var.starts_with('_')
            || self
                .p
                .reads
                .iter()
                .any(|r| r.oracle == o.name && r.var == var)
            || self
                .shared
                .iter()
                .any(|(ro, rv)| *ro == o.name && rv == var)
    }

    fn report_unused(&mut self, o: &OracleDecl, bindings: Vec<Binding>) {
        for b in bindings {
            if !b.used && !b.index && !self.exported_var(o, &b.name) {
                self.warn(
                    o.span,
                    format!("variable `{}` in `{}` is never used", b.name, o.name),
                );
            }
        }
    }

    fn bind(&mut self, scope: &mut Vec<Binding>, name: &str, width: Option<Width>) {
        scope.push(Binding {
            name: name.to_string(),
            width,
            used: false,
            index: false,
        });
    }

    fn scoped(&mut self, o: &'a OracleDecl, s: &'a Stmt, scope: &mut Vec<Binding>) {
        let mark = scope.len();
        self.stmt(o, s, scope);
        let dropped: Vec<Binding> = scope.drain(mark..).collect();
        self.report_unused(o, dropped);
    }

    fn expect_bit(&mut self, o: &OracleDecl, e: &Expr, scope: &mut Vec<Binding>, what: &str) {
        if let Some(w) = self.expr(o, e, scope) {
            if w != Width::fixed(1) {
                self.error(
                    o.span,
                    format!("{what} in `{}` has width {w}, expected 1", o.name),
                );
            }
        }
    }

    fn stmt(&mut self, o: &'a OracleDecl, s: &'a Stmt, scope: &mut Vec<Binding>) {
        match s {
            Stmt::Sample { var, width, next } => {
                if !width.is_positive() {
                    self.error(o.span, format!("sample of `{var}` has zero width"));
                }
                self.bind(scope, var, Some(*width));
                self.stmt(o, next, scope);
            }
            Stmt::Let { var, expr, next } => {
                let w = self.expr(o, expr, scope);
                self.bind(scope, var, w);
                self.stmt(o, next, scope);
            }
            Stmt::Insert {
                table,
                values,
                next,
            } => {
                let ws: Vec<Option<Width>> =
                    values.iter().map(|e| self.expr(o, e, scope)).collect();
                self.check_row(o, table, &ws);
                self.stmt(o, next, scope);
            }
            Stmt::Get {
                table,
                pattern,
                cond,
                then,
                els,
            } => {
                let cols = match self.p.table(table) {
                    Some(t) => Some(t.columns.clone()),
                    None => {
                        self.error(o.span, format!("table `{table}` is not declared"));
                        None
                    }
                };
                if let Some(c) = &cols {
                    if c.len() != pattern.len() {
                        self.error(
                            o.span,
                            format!(
                                "table `{table}` has {} columns, pattern has {}",
                                c.len(),
                                pattern.len()
                            ),
                        );
                    }
                }
                let mark = scope.len();
                for (i, pat) in pattern.iter().enumerate() {
                    let col = cols.as_ref().and_then(|c| c.get(i).copied());
                    match pat {
                        Pattern::Match(e) => {
                            let w = self.expr(o, e, scope);
                            if let (Some(w), Some(c)) = (w, col) {
                                if w != c {
                                    self.error(
                                        o.span,
                                        format!(
                                            "column {} of `{table}` has width {c}, got {w}",
                                            i + 1
                                        ),
                                    );
                                }
                            }
                        }
                        Pattern::Bind(v) => self.bind(scope, v, col),
                    }
                }
                if let Some(c) = cond {
                    self.expect_bit(o, c, scope, "get condition");
                }
                self.scoped(o, then, scope);
                let bound: Vec<Binding> = scope.drain(mark..).collect();
                self.report_unused(o, bound);
                self.scoped(o, els, scope);
            }
            Stmt::Find {
                index,
                bound,
                cond,
                then,
                els,
            } => {
                scope.push(Binding {
                    name: index.clone(),
                    width: bound
                        .is_fixed()
                        .then(|| Width::fixed(index_width(bound.offset))),
                    used: true,
                    index: true,
                });
                self.expect_bit(o, cond, scope, "find condition");
                if !has_keyed_conjunct(cond, index) {
                    self.warn(
                        o.span,
                        format!(
                            "find over `{index}` in `{}` may match several candidates; the first is taken",
                            o.name
                        ),
                    );
                }
                self.scoped(o, then, scope);
                scope.pop();
                self.scoped(o, els, scope);
            }
            Stmt::If { cond, then, els } => {
                self.expect_bit(o, cond, scope, "if condition");
                self.scoped(o, then, scope);
                self.scoped(o, els, scope);
            }
            Stmt::Return(es) => {
                for e in es {
                    self.expr(o, e, scope);
                }
            }
            Stmt::Yield => {}
            Stmt::Run { oracle, args } => {
                let ws: Vec<Option<Width>> = args.iter().map(|e| self.expr(o, e, scope)).collect();
                if let Some(t) = self.p.oracle(oracle) {
                    if t.kind == OracleKind::Init {
                        self.error(o.span, format!("cannot run init block `{oracle}`"));
                    } else if t.params.len() != ws.len() {
                        self.error(
                            o.span,
                            format!(
                                "`{oracle}` takes {} arguments, got {}",
                                t.params.len(),
                                ws.len()
                            ),
                        );
                    } else {
                        for (prm, w) in t.params.iter().zip(&ws) {
                            if let Some(w) = w {
                                if *w != prm.width {
                                    self.error(
                                        o.span,
                                        format!(
                                            "argument `{}` of `{oracle}` has width {}, got {w}",
                                            prm.name, prm.width
                                        ),
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    fn check_row(&mut self, o: &OracleDecl, table: &str, ws: &[Option<Width>]) {
        let Some(t) = self.p.table(table) else {
            self.error(o.span, format!("table `{table}` is not declared"));
            return;
        };
        if t.columns.len() != ws.len() {
            self.error(
                o.span,
                format!(
                    "table `{table}` has {} columns, insert has {}",
                    t.columns.len(),
                    ws.len()
                ),
            );
            return;
        }
        let cols = t.columns.clone();
        for (i, (c, w)) in cols.iter().zip(ws).enumerate() {
            if let Some(w) = w {
                if w != c {
                    self.error(
                        o.span,
                        format!("column {} of `{table}` has width {c}, got {w}", i + 1),
                    );
                }
            }
        }
    }

    fn check_foreign(
        &mut self,
        o: &OracleDecl,
        var: &str,
        index: &Option<String>,
        span: Span,
        scope: &mut [Binding],
    ) {
        if !self.p.reads.iter().any(|r| r.var == var) {
            let definer = self
                .p
                .oracles
                .iter()
                .find(|d| defined_vars(self.p, d).iter().any(|(v, _)| v == var))
                .map_or("?".to_string(), |d| d.name.clone());
            self.error(
                span,
                format!(
                    "undeclared foreign read of ({definer}, {var}) in `{}`",
                    o.name
                ),
            );
        }
        if let Some(ix) = index {
            match scope.iter_mut().rev().find(|b| b.name == *ix) {
                Some(b) if b.index => b.used = true,
                _ => self.error(span, format!("`{ix}` is not a replication or find index")),
            }
        }
    }

    fn expr(&mut self, o: &OracleDecl, e: &Expr, scope: &mut Vec<Binding>) -> Option<Width> {
        let one = Width::fixed(1);
        match e {
            Expr::Var(v) => match scope.iter_mut().rev().find(|b| b.name == *v) {
                Some(b) => {
                    b.used = true;
                    b.width
                }
                None => {
                    self.error(
                        o.span,
                        format!("use of undefined variable `{v}` in `{}`", o.name),
                    );
                    None
                }
            },
            Expr::Foreign { var, index, span } => {
                self.check_foreign(o, var, index, *span, scope);
                self.foreign_width(var)
            }
            Expr::Lit(b) => Some(Width::fixed(b.width())),
            Expr::Zero(w) => Some(*w),
            Expr::Not(x) => {
                self.expect_bit(o, x, scope, "negated expression");
                Some(one)
            }
            Expr::Bin(op, a, b) => {
                let wa = self.expr(o, a, scope);
                let wb = self.expr(o, b, scope);
                match op {
                    BinOp::And | BinOp::Or => {
                        for w in [wa, wb].into_iter().flatten() {
                            if w != one {
                                self.error(
                                    o.span,
                                    format!("boolean operand of width {w} in `{}`", o.name),
                                );
                            }
                        }
                        Some(one)
                    }
                    BinOp::Eq | BinOp::Neq | BinOp::Xor => {
                        if let (Some(x), Some(y)) = (wa, wb) {
                            if x != y {
                                self.error(
                                    o.span,
                                    format!("operands of widths {x} and {y} in `{}`", o.name),
                                );
                            }
                        }
                        if *op == BinOp::Xor {
                            wa.or(wb)
                        } else {
                            Some(one)
                        }
                    }
                    BinOp::Concat => Some(wa?.add(&wb?)),
                }
            }
            Expr::Trunc(w, x) => {
                if let Some(xw) = self.expr(o, x, scope) {
                    if !w.le_everywhere(&xw) {
                        self.error(o.span, format!("cannot truncate width {xw} to {w}"));
                    }
                }
                Some(*w)
            }
            Expr::Inc(m, x) => {
                if *m == 0 {
                    self.error(o.span, "increment modulus must be positive".into());
                }
                self.expr(o, x, scope)
            }
            Expr::Defined(refs) => {
                for r in refs {
                    self.check_foreign(o, &r.var, &r.index, r.span, scope);
                }
                Some(one)
            }
            Expr::Prim { name, width, args } => {
                let ws: Vec<Option<Width>> = args.iter().map(|a| self.expr(o, a, scope)).collect();
                match (name.as_str(), width, ws.as_slice()) {
                    ("prg", None, [w]) => w.map(|w| w.scale(4)),
                    ("prf", Some(out), [_, _]) => Some(*out),
                    _ => {
                        self.error(o.span, format!("malformed primitive application `{name}`"));
                        None
                    }
                }
            }
        }
    }
}

/// True if `cond` has a top-level conjunct `x[index] == e` (either side).
fn has_keyed_conjunct(cond: &Expr, index: &str) -> bool {
    let keyed = |e: &Expr| matches!(e, Expr::Foreign { index: Some(i), .. } if i == index);
    match cond {
        Expr::Bin(BinOp::And, a, b) => has_keyed_conjunct(a, index) || has_keyed_conjunct(b, index),
        Expr::Bin(BinOp::Eq, a, b) => keyed(a) || keyed(b),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_program;
    use super::*;

    fn diags(src: &str) -> Vec<Diagnostic> {
        validate(&parse_program(src).unwrap())
    }

    fn errors(src: &str) -> Vec<String> {
        diags(src)
            .into_iter()
            .filter(|d| d.is_error())
            .map(|d| d.message)
            .collect()
    }

    #[test]
    fn clean_program() {
        assert!(diags("let O(x: 2) := y <- sample(2); return(x ^ y).").is_empty());
    }

    #[test]
    fn undeclared_foreign_read_names_oracle_and_var() {
        let src = "let A() := s <- sample(1); return(s).\nlet B() := return(s[]).";
        let errs = errors(src);
        assert_eq!(errs.len(), 1);
        assert!(errs[0].contains("(A, s)"), "{errs:?}");
        let ok = "reads A.s.\nlet A() := s <- sample(1); return(s).\nlet B() := return(s[]).";
        assert!(errors(ok).is_empty());
    }

    #[test]
    fn width_mismatch() {
        let errs = errors("let O(x: 2, y: 1) := return(x ^ y).");
        assert!(errs[0].contains("widths 2 and 1"));
    }

    #[test]
    fn undefined_and_unused() {
        let d = diags("let O() := y <- sample(1); return(z).");
        assert!(d.iter().any(|d| d.is_error() && d.message.contains("`z`")));
        assert!(d.iter().any(|d| !d.is_error() && d.message.contains("`y`")));
    }

    #[test]
    fn find_multi_match_warning() {
        let src = "reads O.m.\nforeach i <= 2 do (O(m: 1) := return()).\n\
                   let Q() := find j <= 2 suchthat defined(m[j]) then return(m[j]) else yield.";
        let d = diags(src);
        assert!(d
            .iter()
            .any(|d| !d.is_error() && d.message.contains("first is taken")));
        let keyed = src.replace("defined(m[j])", "defined(m[j]) && m[j] == 0b1");
        assert!(diags(&keyed)
            .iter()
            .all(|d| !d.message.contains("first is taken")));
    }

    #[test]
    fn exports_and_duplicates() {
        let errs = errors("export X.\nlet O() := yield.\nlet O() := yield.");
        assert!(errs.iter().any(|e| e.contains("`X` is not declared")));
        assert!(errs.iter().any(|e| e.contains("duplicate oracle")));
    }

    #[test]
    fn render_format() {
        let d = diags("let O() := return(z).");
        assert_eq!(
            d[0].render("f.ocl"),
            "f.ocl:1:1: error: use of undefined variable `z` in `O`"
        );
    }
}
