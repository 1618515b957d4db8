//! The built-in language instantiations: structures, aspect enumerations,
//! transition builders, reference interpreters, and structure file parsing.
//!
//! Each language module exposes an [`crate::aspects::Evaluator`] plus an
//! independent reference interpreter implemented directly from the semantics,
//! never through the automata path; the two are played against each other by
//! the oracle-equivalence suites.

pub mod cfg;
pub mod ctl;
pub mod fo;
pub mod kripke;
pub mod ltl;
pub mod modal;
pub mod ratfo;
pub mod regex;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("term symbol `{0}` does not belong to this language's alphabet")]
    ForeignSymbol(String),
    #[error("invalid structure: {0}")]
    BadStructure(String),
    #[error("term does not encode a grammar: {0}")]
    BadEncoding(String),
    #[error("encoded grammar is not productive: production for `{0}` has no terminal")]
    NonProductive(String),
}

/// Shared JSON decoding error for structure files.
#[derive(Debug, Error)]
#[error("structure: {0}")]
pub struct StructureParseError(pub String);

pub(crate) fn bad(msg: impl Into<String>) -> StructureParseError {
    StructureParseError(msg.into())
}
