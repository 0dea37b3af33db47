//! PDDL2.1 front end: s-expression reader, raw AST and parsers.

mod ast;
mod parse;
pub mod print;
mod sexpr;

use thiserror::Error;

pub use ast::*;
pub use parse::{parse_domain, parse_problem, validate_problem};
pub use sexpr::{read_all, Pos, SExpr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: undeclared predicate '{name}'")]
    UndeclaredPredicate { pos: Pos, name: String },
}

impl ParseError {
    pub fn new(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError::Syntax { pos, msg: msg.into() }
    }

    pub fn undeclared_predicate(pos: Pos, name: &str) -> Self {
        ParseError::UndeclaredPredicate { pos, name: name.to_string() }
    }

    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax { pos, .. } | ParseError::UndeclaredPredicate { pos, .. } => *pos,
        }
    }
}
