//! The MiniLang source language: one integer function per file, named
//! integer constants, `var`/assignment/`if`/`while`/`return` statements.

mod ast;
mod diff;
mod lexer;
mod parser;
mod patch;
mod printer;

use std::fmt;

pub use ast::{BinaryOp, ConstDecl, Else, Expr, Function, Program, Stmt, StmtKind, Type, UnaryOp};
pub use diff::diff;
pub use parser::{parse_expression, parse_expression_in, parse_program};
pub use patch::{apply_patch, FixKind, FixLocation, Patch, PatchError, PatchFile};
pub use printer::pretty_print;

/// A diagnostic anchored to a source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl SourceError {
    pub fn new(line: u32, col: u32, message: impl Into<String>) -> Self {
        Self {
            line,
            col,
            message: message.into(),
        }
    }
}

impl fmt::Display for SourceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MiniLangError {
    #[error("parse error at {0}")]
    Parse(SourceError),
    #[error("type error at {0}")]
    Type(SourceError),
}

impl MiniLangError {
    pub fn source_error(&self) -> &SourceError {
        match self {
            MiniLangError::Parse(e) | MiniLangError::Type(e) => e,
        }
    }
}
