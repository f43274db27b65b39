//! CSP# intermediate representation: AST, parser, validation, printer and
//! canonical structural comparison.

pub mod ast;
mod canon;
mod lexer;
mod parser;
mod printer;
mod validate;

use thiserror::Error;

pub use ast::*;
pub use canon::{canonicalize, compare_structural, EquivalenceReport};
pub use parser::{parse_expr, parse_model};
pub use printer::{expr as print_expr, print_model, print_process};
pub use validate::{apply_binop, eval_const, eval_constants, validate_model};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CspError {
    #[error("line {line}: syntax error: expected {expected}, found {found}")]
    Syntax {
        line: usize,
        expected: String,
        found: String,
    },
    #[error("line {line}: channel `{channel}` carries {expected} field(s), used with {found}")]
    ArityMismatch {
        channel: String,
        expected: usize,
        found: usize,
        line: usize,
    },
    #[error("line {line}: undeclared identifier `{name}`")]
    Undeclared { name: String, line: usize },
    #[error("line {line}: unknown process `{name}`")]
    UnknownProcess { name: String, line: usize },
    #[error("line {line}: process `{name}` takes {expected} argument(s), given {found}")]
    CallArity {
        name: String,
        expected: usize,
        found: usize,
        line: usize,
    },
    #[error("line {line}: `{name}` is declared twice")]
    Duplicate { name: String, line: usize },
    #[error("channel `{channel}` has capacity {value}; capacities must be at least 1")]
    Capacity { channel: String, value: i64 },
    #[error("{what} is not a compile-time constant")]
    NotConstant { what: String },
}

impl CspError {
    /// Source line the error points at, when it has one.
    pub fn line(&self) -> Option<usize> {
        match self {
            CspError::Syntax { line, .. }
            | CspError::ArityMismatch { line, .. }
            | CspError::Undeclared { line, .. }
            | CspError::UnknownProcess { line, .. }
            | CspError::CallArity { line, .. }
            | CspError::Duplicate { line, .. } => Some(*line),
            CspError::Capacity { .. } | CspError::NotConstant { .. } => None,
        }
    }
}
