//! Text formats for instances, structures, operation tables and theory
//! specifications.
//!
//! All formats are UTF-8 with LF line endings; `#` starts a comment.
//! Names are identifiers `[A-Za-z_][A-Za-z0-9_]*`; any other name is written
//! as a double-quoted string with `\"`, `\\` and `\n` escapes.

mod instance;
mod lexer;
mod operation;
mod structure;
mod theory;

use thiserror::Error;

use crate::definition::DefinitionError;
use crate::formulas::FormulaError;
use crate::model::ModelError;
use crate::polymorphisms::PolymorphismError;
use crate::samplings::SamplingError;

pub use instance::{parse_instance, print_instance};
pub use operation::{parse_operation, print_operation};
pub use structure::{parse_signature, parse_structures, print_signature, print_structure, print_structures};
pub use theory::{parse_theory_spec, TheorySpec};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: {error}")]
    Formula {
        line: usize,
        column: usize,
        error: FormulaError,
    },
    #[error("{line}:{column}: {error}")]
    Definition {
        line: usize,
        column: usize,
        error: DefinitionError,
    },
    #[error("{line}:{column}: {error}")]
    Model {
        line: usize,
        column: usize,
        error: ModelError,
    },
    #[error("{line}:{column}: {error}")]
    Sampling {
        line: usize,
        column: usize,
        error: SamplingError,
    },
    #[error("{line}:{column}: {error}")]
    Polymorphism {
        line: usize,
        column: usize,
        error: PolymorphismError,
    },
    #[error("{line}:{column}: theory `{name}` is not defined before this point")]
    UnknownTheory { line: usize, column: usize, name: String },
    #[error("{line}:{column}: theory `{name}` is defined twice")]
    DuplicateTheory { line: usize, column: usize, name: String },
    #[error("{line}:{column}: unknown builtin `{name}`")]
    UnknownBuiltin { line: usize, column: usize, name: String },
}

impl IoError {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        IoError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    /// `(line, column)` of the offending input.
    pub fn position(&self) -> (usize, usize) {
        match *self {
            IoError::Syntax { line, column, .. }
            | IoError::Formula { line, column, .. }
            | IoError::Definition { line, column, .. }
            | IoError::Model { line, column, .. }
            | IoError::Sampling { line, column, .. }
            | IoError::Polymorphism { line, column, .. }
            | IoError::UnknownTheory { line, column, .. }
            | IoError::DuplicateTheory { line, column, .. }
            | IoError::UnknownBuiltin { line, column, .. } => (line, column),
        }
    }
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// A name as written in the formats: bare when it is an identifier.
pub(crate) fn write_name(s: &str) -> String {
    if is_ident(s) {
        s.to_string()
    } else {
        quote(s)
    }
}
