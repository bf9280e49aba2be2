//! Syntax, parsing, pretty-printing and typing of the While language.

mod ast;
mod lexer;
mod parser;
mod pretty;
mod types;

pub use ast::*;
pub use parser::{parse_program, RESERVED};
pub use pretty::{inline_stmt, inline_stmts, pretty_expr, pretty_lval, pretty_program, pretty_stmts};
pub use types::{fits_int, typecheck, ExprType, LabelInfo, TypeEnv};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("duplicate identifier `{name}`")]
    DuplicateIdentifier { name: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("type error ({rule}): {message}")]
    Rule { rule: &'static str, message: String },
    #[error("undeclared variable `{name}`")]
    UndeclaredVariable { name: String },
    #[error("unknown enumeration `{name}`")]
    UnknownEnum { name: String },
    #[error("input into `{name}` of type pmpt")]
    InputOfPromptType { name: String },
}

/// Any error from turning source text into a well-typed program.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// A parsed program together with its typing environment.
#[derive(Clone, Debug)]
pub struct Checked {
    pub program: Program,
    pub env: TypeEnv,
}

pub fn load(src: &str) -> Result<Checked, LangError> {
    let program = parse_program(src)?;
    let env = typecheck(&program)?;
    Ok(Checked { program, env })
}

/// Typecheck an already built program, renumbering its loops first.
pub fn check(program: &Program) -> Result<Checked, TypeError> {
    let program = label_loops(program);
    let env = typecheck(&program)?;
    Ok(Checked { program, env })
}
