//! Maps between structures: raw structure maps and validated embeddings.

use crate::error::EngineError;
use crate::structures::structure::FinStructure;
use crate::structures::vocab::Elem;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;

/// A total map between the universes of two structures over one vocabulary.
/// Carries no preservation guarantees; predicates below classify it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct StructMap {
    source: Arc<FinStructure>,
    target: Arc<FinStructure>,
    map: BTreeMap<Elem, Elem>,
}

impl StructMap {
    pub fn new(
        source: Arc<FinStructure>,
        target: Arc<FinStructure>,
        map: BTreeMap<Elem, Elem>,
    ) -> Result<Self, EngineError> {
        if source.vocab() != target.vocab() {
            return Err(EngineError::VocabMismatch);
        }
        if map.len() != source.size()
            || !source.elements().all(|e| map.contains_key(&e))
            || !map.values().all(|v| target.universe().contains(v))
        {
            return Err(EngineError::InvalidMap(
                "map must be total on the source universe with values in the target".into(),
            ));
        }
        Ok(StructMap { source, target, map })
    }

    pub fn identity(s: Arc<FinStructure>) -> Self {
        let map = s.elements().map(|e| (e, e)).collect();
        StructMap { source: s.clone(), target: s, map }
    }

    pub fn source(&self) -> &Arc<FinStructure> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FinStructure> {
        &self.target
    }

    pub fn map(&self) -> &BTreeMap<Elem, Elem> {
        &self.map
    }

    pub fn apply(&self, e: Elem) -> Elem {
        self.map[&e]
    }

    pub fn apply_tuple(&self, tuple: &[Elem]) -> Vec<Elem> {
        tuple.iter().map(|e| self.map[e]).collect()
    }

    pub fn image(&self) -> BTreeSet<Elem> {
        self.map.values().copied().collect()
    }

    pub fn preimage(&self, t: Elem) -> Option<Elem> {
        self.map.iter().find(|(_, v)| **v == t).map(|(k, _)| *k)
    }

    pub fn is_injective(&self) -> bool {
        self.image().len() == self.map.len()
    }

    pub fn is_surjective(&self) -> bool {
        self.image().len() == self.target.size()
    }

    /// Every source relation tuple lands in the target relation, and the map
    /// commutes with all function tables.
    pub fn is_homomorphism(&self) -> bool {
        self.preserves_relations() && self.commutes_with_functions()
    }

    pub fn preserves_relations(&self) -> bool {
        (0..self.source.vocab().relations().len()).all(|r| {
            self.source
                .relation(r)
                .iter()
                .all(|t| self.target.has_tuple(r, &self.apply_tuple(t)))
        })
    }

    /// A target tuple inside the image belongs to the target relation only if
    /// its preimage belongs to the source relation.
    pub fn reflects_relations(&self) -> bool {
        let image = self.image();
        let inverse: BTreeMap<Elem, Elem> = self.map.iter().map(|(k, v)| (*v, *k)).collect();
        if inverse.len() != self.map.len() {
            return false; // reflection only meaningful for injective maps
        }
        (0..self.source.vocab().relations().len()).all(|r| {
            self.target
                .relation(r)
                .iter()
                .filter(|t| t.iter().all(|e| image.contains(e)))
                .all(|t| {
                    let pre: Vec<Elem> = t.iter().map(|e| inverse[e]).collect();
                    self.source.has_tuple(r, &pre)
                })
        })
    }

    pub fn commutes_with_functions(&self) -> bool {
        (0..self.source.vocab().functions().len()).all(|f| {
            self.source
                .function(f)
                .iter()
                .all(|(args, v)| self.target.apply(f, &self.apply_tuple(args)) == self.map[v])
        })
    }

    /// `other` after `self` (diagrammatic order: self: A -> B, other: B -> C).
    pub fn then(&self, other: &StructMap) -> Result<StructMap, EngineError> {
        if self.target != other.source {
            return Err(EngineError::InvalidMap("composition endpoints do not match".into()));
        }
        let map = self.map.iter().map(|(k, v)| (*k, other.map[v])).collect();
        StructMap::new(self.source.clone(), other.target.clone(), map)
    }
}

/// An embedding: an injective homomorphism that also reflects relations, so
/// it is an isomorphism onto its image (the induced substructure).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Embedding(StructMap);

impl Embedding {
    pub fn new(map: StructMap) -> Result<Self, EngineError> {
        if !map.is_injective() {
            return Err(EngineError::InvalidMap("embedding must be injective".into()));
        }
        if !map.is_homomorphism() {
            return Err(EngineError::InvalidMap("embedding must be a homomorphism".into()));
        }
        if !map.reflects_relations() {
            return Err(EngineError::InvalidMap("embedding must reflect relations".into()));
        }
        Ok(Embedding(map))
    }

    pub fn from_parts(
        source: Arc<FinStructure>,
        target: Arc<FinStructure>,
        map: BTreeMap<Elem, Elem>,
    ) -> Result<Self, EngineError> {
        Embedding::new(StructMap::new(source, target, map)?)
    }

    pub fn identity(s: Arc<FinStructure>) -> Self {
        Embedding(StructMap::identity(s))
    }

    /// Inclusion of an induced substructure; fails if `sub` is not literally
    /// the structure induced on a subset of `sup`'s universe.
    pub fn inclusion(sub: Arc<FinStructure>, sup: Arc<FinStructure>) -> Result<Self, EngineError> {
        let map = sub.elements().map(|e| (e, e)).collect();
        Embedding::from_parts(sub, sup, map)
    }

    pub fn as_map(&self) -> &StructMap {
        &self.0
    }

    pub fn source(&self) -> &Arc<FinStructure> {
        self.0.source()
    }

    pub fn target(&self) -> &Arc<FinStructure> {
        self.0.target()
    }

    pub fn apply(&self, e: Elem) -> Elem {
        self.0.apply(e)
    }

    pub fn apply_tuple(&self, t: &[Elem]) -> Vec<Elem> {
        self.0.apply_tuple(t)
    }

    pub fn image(&self) -> BTreeSet<Elem> {
        self.0.image()
    }

    pub fn map(&self) -> &BTreeMap<Elem, Elem> {
        self.0.map()
    }

    pub fn preimage(&self, t: Elem) -> Option<Elem> {
        self.0.preimage(t)
    }

    pub fn is_isomorphism(&self) -> bool {
        self.0.is_surjective()
    }

    pub fn then(&self, other: &Embedding) -> Result<Embedding, EngineError> {
        Ok(Embedding(self.0.then(&other.0)?))
    }

    /// The inverse of an isomorphism.
    pub fn inverse(&self) -> Result<Embedding, EngineError> {
        if !self.is_isomorphism() {
            return Err(EngineError::InvalidMap("only isomorphisms can be inverted".into()));
        }
        let map = self.0.map().iter().map(|(k, v)| (*v, *k)).collect();
        Embedding::from_parts(self.target().clone(), self.source().clone(), map)
    }
}

/// Decide whether a candidate assignment is an embedding. Distinguishes a
/// vocabulary mismatch (an error) from a plain `false`.
pub fn is_embedding(
    source: &Arc<FinStructure>,
    target: &Arc<FinStructure>,
    map: &BTreeMap<Elem, Elem>,
) -> Result<bool, EngineError> {
    if source.vocab() != target.vocab() {
        return Err(EngineError::VocabMismatch);
    }
    let Ok(m) = StructMap::new(source.clone(), target.clone(), map.clone()) else {
        return Ok(false);
    };
    Ok(m.is_injective() && m.is_homomorphism() && m.reflects_relations())
}

/// All embeddings from `m` into `n`, in deterministic order (backtracking
/// over source elements ascending, candidate targets ascending).
pub fn enumerate_embeddings(m: &Arc<FinStructure>, n: &Arc<FinStructure>) -> Vec<Embedding> {
    enumerate_embeddings_extending(m, n, &BTreeMap::new())
}

/// All embeddings from `m` into `n` that extend the (partial) assignment
/// `forced`.
pub fn enumerate_embeddings_extending(
    m: &Arc<FinStructure>,
    n: &Arc<FinStructure>,
    forced: &BTreeMap<Elem, Elem>,
) -> Vec<Embedding> {
    search_embeddings(m, n, forced, &|_, _| true, false)
}

/// First embedding extending `forced`, if any.
pub fn find_embedding_extending(
    m: &Arc<FinStructure>,
    n: &Arc<FinStructure>,
    forced: &BTreeMap<Elem, Elem>,
) -> Option<Embedding> {
    search_embeddings(m, n, forced, &|_, _| true, true).into_iter().next()
}

/// Backtracking search over injective assignments, pruning partial maps that
/// already violate preservation, reflection or function commutation.
/// `candidate` filters (source, target) pairs before they are tried.
pub(crate) fn search_embeddings(
    m: &Arc<FinStructure>,
    n: &Arc<FinStructure>,
    forced: &BTreeMap<Elem, Elem>,
    candidate: &dyn Fn(Elem, Elem) -> bool,
    first_only: bool,
) -> Vec<Embedding> {
    assert_eq!(m.vocab(), n.vocab(), "embedding search needs a shared vocabulary");
    let src: Vec<Elem> = m.elements().collect();
    let tgt: Vec<Elem> = n.elements().collect();
    let mut out = Vec::new();
    let mut partial: BTreeMap<Elem, Elem> = BTreeMap::new();
    let mut used: BTreeSet<Elem> = BTreeSet::new();
    // Seed with forced pairs (rejecting non-injective seeds).
    for (&s, &t) in forced {
        if !m.universe().contains(&s) || !n.universe().contains(&t) || !used.insert(t) {
            return out;
        }
        partial.insert(s, t);
    }
    if !partial_consistent(m, n, &partial) {
        return out;
    }
    #[allow(clippy::too_many_arguments)]
    fn extend(
        m: &Arc<FinStructure>,
        n: &Arc<FinStructure>,
        src: &[Elem],
        tgt: &[Elem],
        candidate: &dyn Fn(Elem, Elem) -> bool,
        first_only: bool,
        partial: &mut BTreeMap<Elem, Elem>,
        used: &mut BTreeSet<Elem>,
        out: &mut Vec<Embedding>,
    ) {
        if first_only && !out.is_empty() {
            return;
        }
        let next = src.iter().copied().find(|s| !partial.contains_key(s));
        let Some(s) = next else {
            let emb = Embedding::from_parts(m.clone(), n.clone(), partial.clone())
                .expect("consistent complete assignment is an embedding");
            out.push(emb);
            return;
        };
        for &t in tgt {
            if used.contains(&t) || !candidate(s, t) {
                continue;
            }
            partial.insert(s, t);
            used.insert(t);
            if partial_consistent(m, n, partial) {
                extend(m, n, src, tgt, candidate, first_only, partial, used, out);
            }
            partial.remove(&s);
            used.remove(&t);
            if first_only && !out.is_empty() {
                return;
            }
        }
    }
    extend(m, n, &src, &tgt, candidate, first_only, &mut partial, &mut used, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::classes::graph_structure;
    use crate::structures::vocab::Vocabulary;
    use alloc::vec;

    fn pure_set(elems: &[Elem]) -> Arc<FinStructure> {
        Arc::new(
            FinStructure::relational(
                Arc::new(Vocabulary::default()),
                elems.iter().copied().collect(),
                vec![],
            )
            .unwrap(),
        )
    }

    #[test]
    fn identity_is_embedding() {
        let edge = Arc::new(graph_structure(&[0, 1], &[(0, 1)]));
        let id: BTreeMap<Elem, Elem> = [(0, 0), (1, 1)].into();
        assert_eq!(is_embedding(&edge, &edge, &id), Ok(true));
    }

    #[test]
    fn vertex_into_edge_is_embedding() {
        let v = Arc::new(graph_structure(&[0], &[]));
        let edge = Arc::new(graph_structure(&[0, 1], &[(0, 1)]));
        let m: BTreeMap<Elem, Elem> = [(0, 0)].into();
        assert_eq!(is_embedding(&v, &edge, &m), Ok(true));
    }

    #[test]
    fn unreflected_edge_rejected() {
        // Two isolated vertices into an edge: the edge is not reflected.
        let pair = Arc::new(graph_structure(&[0, 1], &[]));
        let edge = Arc::new(graph_structure(&[0, 1], &[(0, 1)]));
        let m: BTreeMap<Elem, Elem> = [(0, 0), (1, 1)].into();
        assert_eq!(is_embedding(&pair, &edge, &m), Ok(false));
    }

    #[test]
    fn vocab_mismatch_is_an_error() {
        let s = pure_set(&[0]);
        let edge = Arc::new(graph_structure(&[0, 1], &[(0, 1)]));
        let m: BTreeMap<Elem, Elem> = [(0, 0)].into();
        assert!(is_embedding(&s, &edge, &m).is_err());
    }

    /// Independent oracle: filter all injections by the embedding predicate.
    fn injection_filter_oracle(m: &Arc<FinStructure>, n: &Arc<FinStructure>) -> usize {
        let src: Vec<Elem> = m.elements().collect();
        let tgt: Vec<Elem> = n.elements().collect();
        let mut count = 0;
        let mut assignment: Vec<Elem> = vec![];
        fn rec(
            src: &[Elem],
            tgt: &[Elem],
            assignment: &mut Vec<Elem>,
            m: &Arc<FinStructure>,
            n: &Arc<FinStructure>,
            count: &mut usize,
        ) {
            if assignment.len() == src.len() {
                let map: BTreeMap<Elem, Elem> =
                    src.iter().copied().zip(assignment.iter().copied()).collect();
                if is_embedding(m, n, &map) == Ok(true) {
                    *count += 1;
                }
                return;
            }
            for &t in tgt {
                if !assignment.contains(&t) {
                    assignment.push(t);
                    rec(src, tgt, assignment, m, n, count);
                    assignment.pop();
                }
            }
        }
        rec(&src, &tgt, &mut assignment, m, n, &mut count);
        count
    }

    #[test]
    fn embedding_counts_match_oracle() {
        let two = pure_set(&[0, 1]);
        assert_eq!(enumerate_embeddings(&two, &two).len(), 2);

        let v = Arc::new(graph_structure(&[0], &[]));
        let edge = Arc::new(graph_structure(&[0, 1], &[(0, 1)]));
        assert_eq!(enumerate_embeddings(&v, &edge).len(), 2);

        let triangle = Arc::new(graph_structure(&[0, 1, 2], &[(0, 1), (1, 2), (0, 2)]));
        assert_eq!(enumerate_embeddings(&edge, &triangle).len(), 6);
        assert_eq!(injection_filter_oracle(&edge, &triangle), 6);

        let path = Arc::new(graph_structure(&[0, 1, 2], &[(0, 1), (1, 2)]));
        for (a, b) in [(&v, &path), (&edge, &path), (&path, &triangle), (&path, &path)] {
            assert_eq!(
                enumerate_embeddings(a, b).len(),
                injection_filter_oracle(a, b),
                "enumeration disagrees with the injection-filter oracle"
            );
        }
    }

    #[test]
    fn embeddings_compose() {
        let v = Arc::new(graph_structure(&[0], &[]));
        let edge = Arc::new(graph_structure(&[0, 1], &[(0, 1)]));
        let triangle = Arc::new(graph_structure(&[0, 1, 2], &[(0, 1), (1, 2), (0, 2)]));
        for f in enumerate_embeddings(&v, &edge) {
            for g in enumerate_embeddings(&edge, &triangle) {
                let h = f.then(&g).unwrap();
                assert_eq!(
                    is_embedding(&v, &triangle, h.map()),
                    Ok(true),
                    "composition of embeddings must be an embedding"
                );
            }
        }
    }
}

/// Check every constraint whose participating elements are all assigned:
/// relation tuples must be preserved and reflected, function rows must
/// commute. Sound for pruning: violations never heal under extension.
fn partial_consistent(
    m: &Arc<FinStructure>,
    n: &Arc<FinStructure>,
    partial: &BTreeMap<Elem, Elem>,
) -> bool {
    let image: BTreeSet<Elem> = partial.values().copied().collect();
    let inverse: BTreeMap<Elem, Elem> = partial.iter().map(|(k, v)| (*v, *k)).collect();
    for r in 0..m.vocab().relations().len() {
        for t in m.relation(r) {
            if t.iter().all(|e| partial.contains_key(e)) {
                let img: Vec<Elem> = t.iter().map(|e| partial[e]).collect();
                if !n.has_tuple(r, &img) {
                    return false;
                }
            }
        }
        for t in n.relation(r) {
            if t.iter().all(|e| image.contains(e)) {
                let pre: Vec<Elem> = t.iter().map(|e| inverse[e]).collect();
                if !m.has_tuple(r, &pre) {
                    return false;
                }
            }
        }
    }
    for f in 0..m.vocab().functions().len() {
        for (args, v) in m.function(f) {
            if args.iter().all(|e| partial.contains_key(e)) {
                let img: Vec<Elem> = args.iter().map(|e| partial[e]).collect();
                let target_v = n.apply(f, &img);
                match partial.get(v) {
                    Some(&mapped) if mapped != target_v => return false,
                    None if image.contains(&target_v) => return false, // would break injectivity
                    _ => {}
                }
            }
        }
    }
    true
}
