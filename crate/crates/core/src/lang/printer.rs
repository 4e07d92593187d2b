//! Canonical pretty-printer; `parse(print(p)) == p` for every valid program.

use super::ast::*;
use std::fmt::Write;

pub fn print_program(p: &OracleProgram) -> String {
    let mut out = String::new();
    if p.name != "main" {
        writeln!(out, "program {}.", p.name).unwrap();
    }
    for t in &p.tables {
        let cols: Vec<String> = t.columns.iter().map(|w| w.to_string()).collect();
        writeln!(out, "table {}({}).", t.name, cols.join(", ")).unwrap();
    }
    if !p.reads.is_empty() {
        let rs: Vec<String> = p
            .reads
            .iter()
            .map(|r| format!("{}.{}", r.oracle, r.var))
            .collect();
        writeln!(out, "reads {}.", rs.join(", ")).unwrap();
    }
    if p.exports != p.default_exports() {
        writeln!(out, "export {}.", p.exports.join(", ")).unwrap();
    }
    let mut done_reps: Vec<&str> = Vec::new();
    for o in &p.oracles {
        match &o.replication {
            None => {
                let head = match o.kind {
                    OracleKind::Init => format!("init {} :=", o.name),
                    OracleKind::Oracle => format!("let {}", signature(o)),
                };
                out.push_str(&head);
                print_body(&mut out, &o.body, 1);
                out.push_str(".\n");
            }
            Some(r) if !done_reps.contains(&r.as_str()) => {
                done_reps.push(r);
                let bound = p.replication(r).map_or(0, |x| x.bound);
                writeln!(out, "foreach {r} <= {bound} do (").unwrap();
                let members: Vec<&OracleDecl> = p
                    .oracles
                    .iter()
                    .filter(|x| x.replication.as_deref() == Some(r))
                    .collect();
                for (k, m) in members.iter().enumerate() {
                    if k > 0 {
                        out.push_str("  |\n");
                    }
                    out.push_str("  ");
                    out.push_str(&signature(m));
                    print_body(&mut out, &m.body, 2);
                    out.push('\n');
                }
                out.push_str(").\n");
            }
            Some(_) => {}
        }
    }
    out
}

fn signature(o: &OracleDecl) -> String {
    let ps: Vec<String> = o
        .params
        .iter()
        .map(|p| format!("{}: {}", p.name, p.width))
        .collect();
    format!("{}({}) :=", o.name, ps.join(", "))
}

fn print_body(out: &mut String, body: &Stmt, indent: usize) {
    if is_terminal(body) {
        out.push(' ');
        out.push_str(&print_stmt(body, 0).trim_start().to_string());
    } else {
        out.push('\n');
        out.push_str(&print_stmt(body, indent));
    }
}

fn is_terminal(s: &Stmt) -> bool {
    matches!(s, Stmt::Return(_) | Stmt::Yield | Stmt::Run { .. })
}

/// Prints a statement at the given indentation level, without a trailing newline.
pub fn print_stmt(s: &Stmt, indent: usize) -> String {
    let mut out = String::new();
    stmt_into(&mut out, s, indent);
    out
}

fn pad(indent: usize) -> String {
    "  ".repeat(indent)
}

fn stmt_into(out: &mut String, s: &Stmt, indent: usize) {
    let p = pad(indent);
    match s {
        Stmt::Sample { var, width, next } => {
            writeln!(out, "{p}{var} <- sample({width});").unwrap();
            stmt_into(out, next, indent);
        }
        Stmt::Let { var, expr, next } => {
            writeln!(out, "{p}let {var} = {} in", print_expr(expr)).unwrap();
            stmt_into(out, next, indent);
        }
        Stmt::Insert {
            table,
            values,
            next,
        } => {
            writeln!(out, "{p}insert {table}({});", exprs(values)).unwrap();
            stmt_into(out, next, indent);
        }
        Stmt::Get {
            table,
            pattern,
            cond,
            then,
            els,
        } => {
            let pats: Vec<String> = pattern
                .iter()
                .map(|x| match x {
                    Pattern::Bind(v) => v.clone(),
                    Pattern::Match(e) => format!("={}", print_expr(e)),
                })
                .collect();
            let st = cond
                .as_ref()
                .map(|c| format!(" suchthat {}", print_expr(c)))
                .unwrap_or_default();
            writeln!(out, "{p}get {table}({}){st} in", pats.join(", ")).unwrap();
            branches(out, then, els, indent);
        }
        Stmt::Find {
            index,
            bound,
            cond,
            then,
            els,
        } => {
            writeln!(
                out,
                "{p}find {index} <= {bound} suchthat {} then",
                print_expr(cond)
            )
            .unwrap();
            branches(out, then, els, indent);
        }
        Stmt::If { cond, then, els } => {
            writeln!(out, "{p}if {} then", print_expr(cond)).unwrap();
            branches(out, then, els, indent);
        }
        Stmt::Return(es) => write!(out, "{p}return({})", exprs(es)).unwrap(),
        Stmt::Yield => write!(out, "{p}yield").unwrap(),
        Stmt::Run { oracle, args } => write!(out, "{p}run {oracle}({})", exprs(args)).unwrap(),
    }
}

fn branches(out: &mut String, then: &Stmt, els: &Stmt, indent: usize) {
    stmt_into(out, then, indent + 1);
    out.push('\n');
    writeln!(out, "{}else", pad(indent)).unwrap();
    stmt_into(out, els, indent + 1);
}

fn exprs(es: &[Expr]) -> String {
    es.iter().map(print_expr).collect::<Vec<_>>().join(", ")
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(op, ..) => match op {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Neq => 3,
            BinOp::Xor => 4,
            BinOp::Concat => 5,
        },
        Expr::Not(_) => 6,
        _ => 7,
    }
}

fn wrap(e: &Expr, min: u8) -> String {
    let s = print_expr(e);
    if prec(e) < min {
        format!("({s})")
    } else {
        s
    }
}

fn foreign(var: &str, index: &Option<String>) -> String {
    format!("{var}[{}]", index.as_deref().unwrap_or(""))
}

pub fn print_expr(e: &Expr) -> String {
    match e {
        Expr::Var(v) => v.clone(),
        Expr::Foreign { var, index, .. } => foreign(var, index),
        Expr::Lit(b) => format!("0b{b}"),
        Expr::Zero(w) => format!("zero[{w}]"),
        Expr::Not(x) => format!("!{}", wrap(x, 6)),
        Expr::Bin(op, a, b) => {
            let sym = match op {
                BinOp::Or => "||",
                BinOp::And => "&&",
                BinOp::Eq => "==",
                BinOp::Neq => "!=",
                BinOp::Xor => "^",
                BinOp::Concat => "++",
            };
            let p = prec(e);
            format!("{} {sym} {}", wrap(a, p), wrap(b, p + 1))
        }
        Expr::Trunc(w, x) => format!("trunc[{w}]({})", print_expr(x)),
        Expr::Inc(m, x) => format!("inc[{m}]({})", print_expr(x)),
        Expr::Defined(refs) => {
            let rs: Vec<String> = refs.iter().map(|r| foreign(&r.var, &r.index)).collect();
            format!("defined({})", rs.join(", "))
        }
        Expr::Prim { name, width, args } => match width {
            Some(w) => format!("{name}[{w}]({})", exprs(args)),
            None => format!("{name}({})", exprs(args)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_program;
    use super::*;

    #[test]
    fn minimal_round_trip_is_exact() {
        let src = "let O() := yield.\n";
        assert_eq!(print_program(&parse_program(src).unwrap()), src);
    }

    #[test]
    fn nested_round_trip() {
        let src = "program P.\ntable T(2, n).\nreads Q.x.\nexport A.\n\
                   foreach i <= 2 do (A(m: 2) := x <- sample(n); insert T(m, x); \
                   get T(=m ^ 0b01, y) suchthat y != zero[n] in if (a || b) && c then return(y ++ m) \
                   else yield else run B(trunc[1](m)) | B(z: 1) := return(inc[2](z), Q.x)).\n";
        let src = src.replace("Q.x)", "x[i])");
        let p = parse_program(&src).unwrap();
        let printed = print_program(&p);
        let q = parse_program(&printed).unwrap();
        assert_eq!(p, q);
        assert_eq!(print_program(&q), printed);
    }
}
