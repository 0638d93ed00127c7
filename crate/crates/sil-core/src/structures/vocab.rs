//! Finitary vocabularies: relation and function symbols with arities.

use crate::error::EngineError;
use alloc::string::String;
use alloc::vec::Vec;

/// An element of a structure's universe. Ids are opaque: structures are only
/// ever compared up to isomorphism, never by element identity.
pub type Elem = u32;

/// A finitary vocabulary: named relation symbols (arity >= 1) and named
/// function symbols (arity >= 0; arity 0 is a constant).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Vocabulary {
    relations: Vec<(String, usize)>,
    functions: Vec<(String, usize)>,
}

impl Vocabulary {
    /// Symbol names must be unique across relations and functions together.
    pub fn new(
        relations: Vec<(String, usize)>,
        functions: Vec<(String, usize)>,
    ) -> Result<Self, EngineError> {
        let mut seen: Vec<&str> = Vec::new();
        for (name, _) in relations.iter().chain(functions.iter()) {
            if seen.contains(&name.as_str()) {
                return Err(EngineError::InvalidVocabulary(alloc::format!(
                    "duplicate symbol `{name}`"
                )));
            }
            seen.push(name);
        }
        for (name, arity) in &relations {
            if *arity == 0 {
                return Err(EngineError::InvalidVocabulary(alloc::format!(
                    "relation `{name}` must have arity >= 1"
                )));
            }
        }
        Ok(Vocabulary { relations, functions })
    }

    pub fn relations(&self) -> &[(String, usize)] {
        &self.relations
    }

    pub fn functions(&self) -> &[(String, usize)] {
        &self.functions
    }

    pub fn relation_arity(&self, idx: usize) -> usize {
        self.relations[idx].1
    }

    pub fn function_arity(&self, idx: usize) -> usize {
        self.functions[idx].1
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|(n, _)| n == name)
    }

    pub fn function_index(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|(n, _)| n == name)
    }

    pub fn has_constants(&self) -> bool {
        self.functions.iter().any(|(_, a)| *a == 0)
    }
}
