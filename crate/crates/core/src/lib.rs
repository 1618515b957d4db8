//! Exact learning of symbolic expressions from labeled structures.
//!
//! Per-example semantic evaluators are compiled into two-way alternating tree
//! automata over expression syntax trees, converted to bottom-up automata,
//! intersected with a regular tree grammar restriction, and checked for
//! emptiness with minimal-witness extraction.

pub mod aspects;
pub mod evaluators;
pub mod learn;
pub mod nfta;
pub mod term;
pub mod twata;
