//! The oracle-process language: syntax, static checks and linking.

pub mod ast;
pub mod lexer;
pub mod link;
pub mod parser;
pub mod printer;
pub mod validate;

pub use ast::*;
pub use link::{link, link_pair, Component, LinkError, OracleRef, Role, WholeProgram};
pub use parser::{parse_program, parse_stmt, ParseError};
pub use printer::{print_expr, print_program, print_stmt};
pub use validate::{has_errors, validate, validate_among, Diagnostic, Severity};
