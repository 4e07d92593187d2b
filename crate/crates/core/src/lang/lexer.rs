use super::ast::Span;
use crate::bits::Bits;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    BinLit(Bits),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Dot,
    Colon,
    Define,
    Arrow,
    Assign,
    EqEq,
    Neq,
    Caret,
    PlusPlus,
    Plus,
    AndAnd,
    OrOr,
    Bang,
    Le,
    Bar,
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Int(i) => return write!(f, "`{i}`"),
            Tok::BinLit(b) => return write!(f, "`0b{b}`"),
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Dot => ".",
            Tok::Colon => ":",
            Tok::Define => ":=",
            Tok::Arrow => "<-",
            Tok::Assign => "=",
            Tok::EqEq => "==",
            Tok::Neq => "!=",
            Tok::Caret => "^",
            Tok::PlusPlus => "++",
            Tok::Plus => "+",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Bang => "!",
            Tok::Le => "<=",
            Tok::Bar => "|",
            Tok::Eof => return f.write_str("end of input"),
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

pub fn lex(src: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let advance = |i: &mut usize, line: &mut u32, col: &mut u32, k: usize| {
        for _ in 0..k {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(line, col);
        let next = chars.get(i + 1).copied();
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '(' && next == Some('*') {
            let mut depth = 0;
            loop {
                if i >= chars.len() {
                    return Err(LexError {
                        span,
                        message: "unterminated comment".into(),
                    });
                }
                if chars[i] == '(' && chars.get(i + 1) == Some(&'*') {
                    depth += 1;
                    advance(&mut i, &mut line, &mut col, 2);
                } else if chars[i] == '*' && chars.get(i + 1) == Some(&')') {
                    depth -= 1;
                    advance(&mut i, &mut line, &mut col, 2);
                    if depth == 0 {
                        break;
                    }
                } else {
                    advance(&mut i, &mut line, &mut col, 1);
                }
            }
            continue;
        }
        if c.is_ascii_digit() {
            if c == '0' && next == Some('b') {
                let start = i + 2;
                let mut end = start;
                while end < chars.len() && (chars[end] == '0' || chars[end] == '1') {
                    end += 1;
                }
                let digits: String = chars[start..end].iter().collect();
                let bits = Bits::parse_binary(&digits)
                    .filter(|_| !digits.is_empty())
                    .ok_or(LexError {
                        span,
                        message: format!("malformed bit literal `0b{digits}`"),
                    })?;
                out.push(Token {
                    tok: Tok::BinLit(bits),
                    span,
                });
                let len = end - i;
                advance(&mut i, &mut line, &mut col, len);
                continue;
            }
            let mut end = i;
            while end < chars.len() && chars[end].is_ascii_digit() {
                end += 1;
            }
            let digits: String = chars[i..end].iter().collect();
            let v = digits.parse().map_err(|_| LexError {
                span,
                message: format!("integer `{digits}` out of range"),
            })?;
            out.push(Token {
                tok: Tok::Int(v),
                span,
            });
            let len = end - i;
            advance(&mut i, &mut line, &mut col, len);
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut end = i;
            while end < chars.len()
                && (chars[end].is_alphanumeric() || chars[end] == '_' || chars[end] == '\'')
            {
                end += 1;
            }
            let ident: String = chars[i..end].iter().collect();
            out.push(Token {
                tok: Tok::Ident(ident),
                span,
            });
            let len = end - i;
            advance(&mut i, &mut line, &mut col, len);
            continue;
        }
        let two = |a: char, b: char| c == a && next == Some(b);
        let (tok, len) = if two(':', '=') {
            (Tok::Define, 2)
        } else if two('<', '-') {
            (Tok::Arrow, 2)
        } else if two('<', '=') {
            (Tok::Le, 2)
        } else if two('=', '=') {
            (Tok::EqEq, 2)
        } else if two('!', '=') {
            (Tok::Neq, 2)
        } else if two('+', '+') {
            (Tok::PlusPlus, 2)
        } else if two('&', '&') {
            (Tok::AndAnd, 2)
        } else if two('|', '|') {
            (Tok::OrOr, 2)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '.' => Tok::Dot,
                ':' => Tok::Colon,
                '=' => Tok::Assign,
                '^' => Tok::Caret,
                '+' => Tok::Plus,
                '!' => Tok::Bang,
                '|' => Tok::Bar,
                _ => {
                    return Err(LexError {
                        span,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            (t, 1)
        };
        out.push(Token { tok, span });
        advance(&mut i, &mut line, &mut col, len);
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(line, col),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn lexes_widths_and_literals() {
        assert_eq!(
            toks("x <- sample(4n); 0b01"),
            vec![
                Tok::Ident("x".into()),
                Tok::Arrow,
                Tok::Ident("sample".into()),
                Tok::LParen,
                Tok::Int(4),
                Tok::Ident("n".into()),
                Tok::RParen,
                Tok::Semi,
                Tok::BinLit(Bits::new(1, 2)),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn skips_nested_comments_and_tracks_lines() {
        let t = lex("(* a (* b *) *)\n  yield").unwrap();
        assert_eq!(t[0].tok, Tok::Ident("yield".into()));
        assert_eq!((t[0].span.line, t[0].span.col), (2, 3));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(lex("0b").is_err());
        assert!(lex("x @ y").is_err());
        assert!(lex("(* open").is_err());
    }
}
