//! Python frontend: parses the restricted FLA subset, resolves names and
//! infers the shape of every message family.
//!
//! The accepted language is one function `def f(nodeId, localData,
//! privateData)` preceded (or opened) by integer constant declarations.
//! Its body uses `for ... in range(BOUND)`, `while`, `if`/`elif`/`else`,
//! `continue`, scalar assignments, the message-passing calls `sendMsg`,
//! `rcvMsg`, `broadcastMsg` and `rcvMsgs`, FIFO lists (`append`,
//! `pop(0)`, `len`) and `dropXxx(list)` helpers, and it ends with
//! `terminated = 1`.

mod ast;
mod lexer;
mod parser;
mod shapes;
mod validate;

use thiserror::Error;

pub use ast::*;
pub(crate) use parser::for_each_expr;
pub use parser::parse_program;
pub use shapes::{infer_message_shapes, MessageShape, MessageShapeMap, NODE_CHANNELS, SCALAR_FIELD};
pub use validate::{validate_restrictions, NameMap, ValidatedProgram};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("line {line}: syntax error: expected {expected}, found {found}")]
    Syntax {
        line: usize,
        expected: String,
        found: String,
    },
    #[error("line {line}: unsupported construct: {construct}")]
    RestrictionViolation { construct: String, line: usize },
    #[error("line {line}: unresolved name `{name}`")]
    UnresolvedName { name: String, line: usize },
    #[error("messages on `{channel}` have conflicting arities {first} and {second}")]
    ShapeConflict {
        channel: String,
        first: usize,
        second: usize,
    },
    #[error("messages on `{channel}` have {arity} fields but no matching field-index constants")]
    MissingFieldNames { channel: String, arity: usize },
}

impl FrontendError {
    pub fn line(&self) -> Option<usize> {
        match self {
            FrontendError::Syntax { line, .. }
            | FrontendError::RestrictionViolation { line, .. }
            | FrontendError::UnresolvedName { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// Parses, validates and infers shapes in one go.
pub fn analyze(
    src: &str,
    names: &NameMap,
) -> Result<(ValidatedProgram, MessageShapeMap), FrontendError> {
    let v = validate_restrictions(parse_program(src)?, names)?;
    let shapes = infer_message_shapes(&v)?;
    Ok((v, shapes))
}
