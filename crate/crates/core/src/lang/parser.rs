use super::ast::*;
use super::lexer::{lex, Tok, Token};
use crate::bits::Width;

/// Names reserved for built-in expression forms.
pub const BUILTINS: &[&str] = &["prg", "prf", "trunc", "zero", "inc", "defined"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}:{}: error: {}",
            self.span.line, self.span.col, self.message
        )
    }
}

pub fn parse_program(src: &str) -> Result<OracleProgram, ParseError> {
    let toks = lex(src).map_err(|e| ParseError {
        span: e.span,
        message: e.message,
    })?;
    let mut p = Parser { toks, pos: 0 };
    p.program()
}

/// Parses a single statement (used by tests and the CLI).
pub fn parse_stmt(src: &str) -> Result<Stmt, ParseError> {
    let toks = lex(src).map_err(|e| ParseError {
        span: e.span,
        message: e.message,
    })?;
    let mut p = Parser { toks, pos: 0 };
    let s = p.stmt()?;
    p.expect(Tok::Eof)?;
    Ok(s)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, what: &str) -> PResult<T> {
        Err(ParseError {
            span: self.span(),
            message: format!("expected {what}, found {}", self.peek()),
        })
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(&t.to_string())
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.err(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.err("identifier"),
        }
    }

    fn int(&mut self) -> PResult<u64> {
        match *self.peek() {
            Tok::Int(v) => {
                self.bump();
                Ok(v)
            }
            _ => self.err("integer"),
        }
    }

    fn width(&mut self) -> PResult<Width> {
        let (coeff, offset) = match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                if self.eat_kw("n") {
                    (v as u32, 0)
                } else {
                    (0, v as u32)
                }
            }
            Tok::Ident(s) if s == "n" => {
                self.bump();
                (1, 0)
            }
            _ => return self.err("width"),
        };
        if coeff > 0 && *self.peek() == Tok::Plus {
            self.bump();
            let d = self.int()? as u32;
            return Ok(Width::linear(coeff, d));
        }
        Ok(Width::linear(coeff, offset))
    }

    fn program(&mut self) -> PResult<OracleProgram> {
        let mut prog = OracleProgram::new("main");
        if self.eat_kw("program") {
            prog.name = self.ident()?;
            self.expect(Tok::Dot)?;
        }
        let mut exports: Option<Vec<String>> = None;
        while *self.peek() != Tok::Eof {
            let span = self.span();
            if self.eat_kw("table") {
                let name = self.ident()?;
                self.expect(Tok::LParen)?;
                let mut columns = vec![self.width()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    columns.push(self.width()?);
                }
                self.expect(Tok::RParen)?;
                self.expect(Tok::Dot)?;
                prog.tables.push(TableDecl {
                    name,
                    columns,
                    span,
                });
            } else if self.eat_kw("reads") {
                loop {
                    let span = self.span();
                    let oracle = self.ident()?;
                    self.expect(Tok::Dot)?;
                    let var = self.ident()?;
                    prog.reads.push(ReadPerm { oracle, var, span });
                    match self.bump() {
                        Tok::Comma => continue,
                        Tok::Dot => break,
                        _ => {
                            self.pos -= 1;
                            return self.err("`,` or `.`");
                        }
                    }
                }
            } else if self.eat_kw("export") {
                let list = exports.get_or_insert_with(Vec::new);
                if *self.peek() != Tok::Dot {
                    list.push(self.ident()?);
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        list.push(self.ident()?);
                    }
                }
                self.expect(Tok::Dot)?;
            } else if self.eat_kw("init") {
                let name = self.ident()?;
                self.expect(Tok::Define)?;
                let body = self.stmt()?;
                self.expect(Tok::Dot)?;
                prog.oracles.push(OracleDecl {
                    name,
                    kind: OracleKind::Init,
                    replication: None,
                    params: Vec::new(),
                    body,
                    span,
                });
            } else if self.eat_kw("let") {
                let decl = self.oracle_decl(None, span)?;
                self.expect(Tok::Dot)?;
                prog.oracles.push(decl);
            } else if self.eat_kw("foreach") {
                let index = self.ident()?;
                self.expect(Tok::Le)?;
                let bound = self.int()? as u32;
                self.expect_kw("do")?;
                self.expect(Tok::LParen)?;
                prog.replications.push(Replication {
                    index: index.clone(),
                    bound,
                    span,
                });
                loop {
                    let dspan = self.span();
                    self.eat_kw("let");
                    let decl = self.oracle_decl(Some(index.clone()), dspan)?;
                    prog.oracles.push(decl);
                    if *self.peek() == Tok::Bar {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
                self.expect(Tok::Dot)?;
            } else {
                return self.err("declaration");
            }
        }
        prog.exports = exports.unwrap_or_else(|| prog.default_exports());
        Ok(prog)
    }

    fn oracle_decl(&mut self, replication: Option<String>, span: Span) -> PResult<OracleDecl> {
        let name = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let pname = self.ident()?;
                self.expect(Tok::Colon)?;
                let width = self.width()?;
                params.push(Param { name: pname, width });
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Define)?;
        let body = self.stmt()?;
        Ok(OracleDecl {
            name,
            kind: OracleKind::Oracle,
            replication,
            params,
            body,
            span,
        })
    }

    fn else_branch(&mut self) -> PResult<Box<Stmt>> {
        if self.eat_kw("else") {
            Ok(Box::new(self.stmt()?))
        } else {
            Ok(Box::new(Stmt::Yield))
        }
    }

    fn expr_list(&mut self) -> PResult<Vec<Expr>> {
        self.expect(Tok::LParen)?;
        let mut out = Vec::new();
        if *self.peek() != Tok::RParen {
            out.push(self.expr()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                out.push(self.expr()?);
            }
        }
        self.expect(Tok::RParen)?;
        Ok(out)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        if *self.peek() == Tok::LParen {
            self.bump();
            let s = self.stmt()?;
            self.expect(Tok::RParen)?;
            return Ok(s);
        }
        if let (Tok::Ident(var), Tok::Arrow) = (self.peek().clone(), self.peek_at(1).clone()) {
            self.bump();
            self.bump();
            self.expect_kw("sample")?;
            self.expect(Tok::LParen)?;
            let width = self.width()?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::Semi)?;
            let next = Box::new(self.stmt()?);
            return Ok(Stmt::Sample { var, width, next });
        }
        if self.eat_kw("let") {
            let var = self.ident()?;
            self.expect(Tok::Assign)?;
            let expr = self.expr()?;
            self.expect_kw("in")?;
            let next = Box::new(self.stmt()?);
            return Ok(Stmt::Let { var, expr, next });
        }
        if self.eat_kw("insert") {
            let table = self.ident()?;
            let values = self.expr_list()?;
            self.expect(Tok::Semi)?;
            let next = Box::new(self.stmt()?);
            return Ok(Stmt::Insert {
                table,
                values,
                next,
            });
        }
        if self.eat_kw("get") {
            let table = self.ident()?;
            self.expect(Tok::LParen)?;
            let mut pattern = Vec::new();
            if *self.peek() != Tok::RParen {
                loop {
                    if matches!(self.peek(), Tok::Assign | Tok::EqEq) {
                        self.bump();
                        pattern.push(Pattern::Match(self.expr()?));
                    } else {
                        pattern.push(Pattern::Bind(self.ident()?));
                    }
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
            let cond = if self.eat_kw("suchthat") {
                Some(self.expr()?)
            } else {
                None
            };
            self.expect_kw("in")?;
            let then = Box::new(self.stmt()?);
            let els = self.else_branch()?;
            return Ok(Stmt::Get {
                table,
                pattern,
                cond,
                then,
                els,
            });
        }
        if self.eat_kw("find") {
            let index = self.ident()?;
            self.expect(Tok::Le)?;
            let bound = self.width()?;
            self.expect_kw("suchthat")?;
            let cond = self.expr()?;
            self.expect_kw("then")?;
            let then = Box::new(self.stmt()?);
            let els = self.else_branch()?;
            return Ok(Stmt::Find {
                index,
                bound,
                cond,
                then,
                els,
            });
        }
        if self.eat_kw("if") {
            let cond = self.expr()?;
            self.expect_kw("then")?;
            let then = Box::new(self.stmt()?);
            let els = self.else_branch()?;
            return Ok(Stmt::If { cond, then, els });
        }
        if self.eat_kw("return") {
            return Ok(Stmt::Return(self.expr_list()?));
        }
        if self.eat_kw("yield") {
            return Ok(Stmt::Yield);
        }
        if self.eat_kw("run") {
            let oracle = self.ident()?;
            let args = self.expr_list()?;
            return Ok(Stmt::Run { oracle, args });
        }
        self.err("statement")
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        let mut e = self.expr_and()?;
        while *self.peek() == Tok::OrOr {
            self.bump();
            e = Expr::bin(BinOp::Or, e, self.expr_and()?);
        }
        Ok(e)
    }

    fn expr_and(&mut self) -> PResult<Expr> {
        let mut e = self.expr_eq()?;
        while *self.peek() == Tok::AndAnd {
            self.bump();
            e = Expr::bin(BinOp::And, e, self.expr_eq()?);
        }
        Ok(e)
    }

    fn expr_eq(&mut self) -> PResult<Expr> {
        let mut e = self.expr_xor()?;
        loop {
            let op = match self.peek() {
                Tok::EqEq | Tok::Assign => BinOp::Eq,
                Tok::Neq => BinOp::Neq,
                _ => return Ok(e),
            };
            self.bump();
            e = Expr::bin(op, e, self.expr_xor()?);
        }
    }

    fn expr_xor(&mut self) -> PResult<Expr> {
        let mut e = self.expr_concat()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            e = Expr::bin(BinOp::Xor, e, self.expr_concat()?);
        }
        Ok(e)
    }

    fn expr_concat(&mut self) -> PResult<Expr> {
        let mut e = self.expr_unary()?;
        while *self.peek() == Tok::PlusPlus {
            self.bump();
            e = Expr::bin(BinOp::Concat, e, self.expr_unary()?);
        }
        Ok(e)
    }

    fn expr_unary(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Bang {
            self.bump();
            return Ok(Expr::Not(Box::new(self.expr_unary()?)));
        }
        self.atom()
    }

    fn foreign_ref(&mut self) -> PResult<ForeignRef> {
        let span = self.span();
        let var = self.ident()?;
        self.expect(Tok::LBracket)?;
        let index = if *self.peek() == Tok::RBracket {
            None
        } else {
            Some(self.ident()?)
        };
        self.expect(Tok::RBracket)?;
        Ok(ForeignRef { var, index, span })
    }

    fn bracket_width(&mut self) -> PResult<Width> {
        self.expect(Tok::LBracket)?;
        let w = self.width()?;
        self.expect(Tok::RBracket)?;
        Ok(w)
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::BinLit(b) => {
                self.bump();
                Ok(Expr::Lit(b))
            }
            Tok::Ident(name) => match name.as_str() {
                "zero" => {
                    self.bump();
                    Ok(Expr::Zero(self.bracket_width()?))
                }
                "trunc" => {
                    self.bump();
                    let w = self.bracket_width()?;
                    let e = self.single_arg()?;
                    Ok(Expr::Trunc(w, Box::new(e)))
                }
                "inc" => {
                    self.bump();
                    self.expect(Tok::LBracket)?;
                    let m = self.int()?;
                    self.expect(Tok::RBracket)?;
                    let e = self.single_arg()?;
                    Ok(Expr::Inc(m, Box::new(e)))
                }
                "defined" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let mut refs = vec![self.foreign_ref()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        refs.push(self.foreign_ref()?);
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Expr::Defined(refs))
                }
                "prg" | "prf" => {
                    self.bump();
                    let width = if *self.peek() == Tok::LBracket {
                        Some(self.bracket_width()?)
                    } else {
                        None
                    };
                    let args = self.expr_list()?;
                    Ok(Expr::Prim { name, width, args })
                }
                _ => {
                    if *self.peek_at(1) == Tok::LBracket {
                        let r = self.foreign_ref()?;
                        Ok(Expr::Foreign {
                            var: r.var,
                            index: r.index,
                            span: r.span,
                        })
                    } else {
                        self.bump();
                        Ok(Expr::Var(name))
                    }
                }
            },
            _ => self.err("expression"),
        }
    }

    fn single_arg(&mut self) -> PResult<Expr> {
        self.expect(Tok::LParen)?;
        let e = self.expr()?;
        self.expect(Tok::RParen)?;
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_program() {
        let p = parse_program("let O() := yield.\n").unwrap();
        assert_eq!(p.name, "main");
        assert_eq!(p.exports, vec!["O".to_string()]);
        assert_eq!(p.oracles[0].body, Stmt::Yield);
    }

    #[test]
    fn else_binds_to_nearest_get() {
        let s = parse_stmt("get T(x) in get U(y) in yield else return() else yield").unwrap();
        match s {
            Stmt::Get { then, els, .. } => {
                assert!(matches!(*then, Stmt::Get { .. }));
                assert_eq!(*els, Stmt::Yield);
                if let Stmt::Get { els: inner, .. } = *then {
                    assert_eq!(*inner, Stmt::Return(vec![]));
                }
            }
            _ => panic!("expected get"),
        }
    }

    #[test]
    fn precedence() {
        let s = parse_stmt("return(a ^ b == c && d)").unwrap();
        let Stmt::Return(es) = s else { panic!() };
        let v = |s: &str| Expr::Var(s.into());
        assert_eq!(
            es[0],
            Expr::bin(
                BinOp::And,
                Expr::bin(BinOp::Eq, Expr::bin(BinOp::Xor, v("a"), v("b")), v("c")),
                v("d")
            )
        );
    }

    #[test]
    fn widths() {
        let s = parse_stmt("x <- sample(2n+1); y <- sample(n); z <- sample(3); yield").unwrap();
        let Stmt::Sample { width, next, .. } = s else {
            panic!()
        };
        assert_eq!(width, Width::linear(2, 1));
        let Stmt::Sample { width, next, .. } = *next else {
            panic!()
        };
        assert_eq!(width, Width::linear(1, 0));
        let Stmt::Sample { width, .. } = *next else {
            panic!()
        };
        assert_eq!(width, Width::fixed(3));
    }

    #[test]
    fn reports_position() {
        let e = parse_program("let O() :=\n  retrun(x).").unwrap_err();
        assert_eq!((e.span.line, e.span.col), (2, 3));
    }
}
