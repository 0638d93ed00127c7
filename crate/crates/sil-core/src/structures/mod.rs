//! Finite structures, vocabularies, embeddings, and isomorphism machinery.

pub mod canon;
pub mod map;
pub mod structure;
pub mod vocab;

pub use canon::{are_isomorphic, find_isomorphism_colored, invariant_key, refine_colors, Coloring, IsoClasses};
pub use map::{
    enumerate_embeddings, enumerate_embeddings_extending, find_embedding_extending, is_embedding,
    Embedding, StructMap,
};
pub use structure::{subsets_of, tuples_over, FinStructure};
pub use vocab::{Elem, Vocabulary};
