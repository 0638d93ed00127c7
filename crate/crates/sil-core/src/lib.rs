//! Core engine for exploring independence relations over finite structures.
//!
//! Everything here is pure and deterministic: structures, embeddings and
//! diagrams are immutable values, collections are ordered (`BTreeMap`/
//! `BTreeSet`), and every search visits its configuration space in a fixed
//! canonical order. Verdicts are three-valued (`Holds`/`Fails`/
//! `Inconclusive`): a property is only asserted to fail when an exhaustive
//! sweep at the stated bound proves it, and searches that exhaust their
//! budget say so instead of guessing.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats and the CLI live
//! in the companion `sil-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod budget;
pub mod error;
pub mod structures;

pub mod catalog;
pub mod colimits;
pub mod diagrams;
pub mod galois;
pub mod independence;
pub mod report;

pub mod experiments;

pub use budget::SearchBudget;
pub use error::EngineError;
pub use report::{CheckReport, Verdict, Witness};
pub use structures::{Elem, Embedding, FinStructure, StructMap, Vocabulary};
