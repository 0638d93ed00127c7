//! Error type shared by the engine.

use alloc::string::String;
use core::fmt;

/// Errors raised by engine operations.
///
/// These are contract violations (mismatched vocabularies, malformed input,
/// unsupported capability), never search outcomes: a search that cannot
/// decide reports `Verdict::Inconclusive` instead of an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EngineError {
    /// Two structures that must share a vocabulary do not.
    VocabMismatch,
    /// A vocabulary violates its invariants (duplicate symbols, zero-arity relation).
    InvalidVocabulary(String),
    /// A structure violates its invariants (stray tuple, partial function table).
    InvalidStructure(String),
    /// A map between structures violates its invariants.
    InvalidMap(String),
    /// Two diagrams that must share a span do not.
    SpanMismatch,
    /// Two pointed extensions that must share a base do not.
    BaseMismatch,
    /// The class does not provide the requested capability.
    Unsupported(String),
    /// The relation cannot be paired with the class.
    IncompatiblePairing { relation: String, class: String },
    /// Unknown class or relation name.
    UnknownName(String),
    /// A numeric parameter is out of range (e.g. a composite characteristic).
    BadParameter(String),
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::VocabMismatch => write!(f, "structures do not share a vocabulary"),
            EngineError::InvalidVocabulary(m) => write!(f, "invalid vocabulary: {m}"),
            EngineError::InvalidStructure(m) => write!(f, "invalid structure: {m}"),
            EngineError::InvalidMap(m) => write!(f, "invalid map: {m}"),
            EngineError::SpanMismatch => write!(f, "diagrams do not share a span"),
            EngineError::BaseMismatch => write!(f, "pointed extensions do not share a base"),
            EngineError::Unsupported(m) => write!(f, "unsupported operation: {m}"),
            EngineError::IncompatiblePairing { relation, class } => {
                write!(f, "relation `{relation}` is not available on class `{class}`")
            }
            EngineError::UnknownName(m) => write!(f, "unknown name: {m}"),
            EngineError::BadParameter(m) => write!(f, "bad parameter: {m}"),
        }
    }
}
