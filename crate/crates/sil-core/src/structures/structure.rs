//! Finite structures: a universe plus relation and total function tables.

use crate::error::EngineError;
use crate::structures::vocab::{Elem, Vocabulary};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

/// A finite structure in a finitary vocabulary.
///
/// Invariants, enforced at construction:
/// - every tuple component lies in the universe;
/// - every function table is total on `universe^arity` with values in the
///   universe;
/// - the universe may be empty only if the vocabulary has no constants.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FinStructure {
    vocab: Arc<Vocabulary>,
    universe: BTreeSet<Elem>,
    rels: Vec<BTreeSet<Vec<Elem>>>,
    funcs: Vec<BTreeMap<Vec<Elem>, Elem>>,
}

impl FinStructure {
    pub fn new(
        vocab: Arc<Vocabulary>,
        universe: BTreeSet<Elem>,
        rels: Vec<BTreeSet<Vec<Elem>>>,
        funcs: Vec<BTreeMap<Vec<Elem>, Elem>>,
    ) -> Result<Self, EngineError> {
        if rels.len() != vocab.relations().len() || funcs.len() != vocab.functions().len() {
            return Err(EngineError::InvalidStructure(
                "table count does not match vocabulary".into(),
            ));
        }
        if universe.is_empty() && vocab.has_constants() {
            return Err(EngineError::InvalidStructure(
                "empty universe with constants in the vocabulary".into(),
            ));
        }
        for (idx, table) in rels.iter().enumerate() {
            let arity = vocab.relation_arity(idx);
            for tuple in table {
                if tuple.len() != arity || tuple.iter().any(|e| !universe.contains(e)) {
                    return Err(EngineError::InvalidStructure(format!(
                        "bad tuple in relation `{}`",
                        vocab.relations()[idx].0
                    )));
                }
            }
        }
        for (idx, table) in funcs.iter().enumerate() {
            let arity = vocab.function_arity(idx);
            let expected = universe.len().pow(arity as u32);
            if table.len() != expected {
                return Err(EngineError::InvalidStructure(format!(
                    "function `{}` is not total",
                    vocab.functions()[idx].0
                )));
            }
            for (args, value) in table {
                if args.len() != arity
                    || args.iter().any(|e| !universe.contains(e))
                    || !universe.contains(value)
                {
                    return Err(EngineError::InvalidStructure(format!(
                        "bad row in function `{}`",
                        vocab.functions()[idx].0
                    )));
                }
            }
        }
        Ok(FinStructure { vocab, universe, rels, funcs })
    }

    /// A structure over a purely relational vocabulary.
    pub fn relational(
        vocab: Arc<Vocabulary>,
        universe: BTreeSet<Elem>,
        rels: Vec<BTreeSet<Vec<Elem>>>,
    ) -> Result<Self, EngineError> {
        let nf = vocab.functions().len();
        FinStructure::new(vocab, universe, rels, alloc::vec![BTreeMap::new(); nf])
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn universe(&self) -> &BTreeSet<Elem> {
        &self.universe
    }

    pub fn size(&self) -> usize {
        self.universe.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        self.universe.iter().copied()
    }

    pub fn relation(&self, idx: usize) -> &BTreeSet<Vec<Elem>> {
        &self.rels[idx]
    }

    pub fn function(&self, idx: usize) -> &BTreeMap<Vec<Elem>, Elem> {
        &self.funcs[idx]
    }

    pub fn has_tuple(&self, rel: usize, tuple: &[Elem]) -> bool {
        self.rels[rel].contains(tuple)
    }

    pub fn apply(&self, func: usize, args: &[Elem]) -> Elem {
        self.funcs[func][args]
    }

    /// Closure of `seed` under all function tables.
    pub fn generated_subset(&self, seed: &BTreeSet<Elem>) -> BTreeSet<Elem> {
        let mut out: BTreeSet<Elem> = seed.iter().copied().collect();
        debug_assert!(out.iter().all(|e| self.universe.contains(e)));
        loop {
            let mut grew = false;
            for (idx, table) in self.funcs.iter().enumerate() {
                let arity = self.vocab.function_arity(idx);
                if arity == 0 {
                    let v = table[&Vec::new()];
                    grew |= out.insert(v);
                    continue;
                }
                for (args, value) in table {
                    if args.iter().all(|a| out.contains(a)) && out.insert(*value) {
                        grew = true;
                    }
                }
            }
            if !grew {
                return out;
            }
        }
    }

    /// The induced substructure on `subset`, or `None` if the subset is not
    /// closed under the function tables.
    pub fn substructure_on(&self, subset: &BTreeSet<Elem>) -> Option<FinStructure> {
        debug_assert!(subset.iter().all(|e| self.universe.contains(e)));
        let mut funcs = Vec::with_capacity(self.funcs.len());
        for table in &self.funcs {
            let mut sub = BTreeMap::new();
            for (args, value) in table {
                if args.iter().all(|a| subset.contains(a)) {
                    if !subset.contains(value) {
                        return None;
                    }
                    sub.insert(args.clone(), *value);
                }
            }
            funcs.push(sub);
        }
        let rels = self
            .rels
            .iter()
            .map(|table| {
                table
                    .iter()
                    .filter(|t| t.iter().all(|e| subset.contains(e)))
                    .cloned()
                    .collect()
            })
            .collect();
        Some(FinStructure {
            vocab: self.vocab.clone(),
            universe: subset.clone(),
            rels,
            funcs,
        })
    }

    /// Relabel elements through `map`, which must be an injection defined on
    /// the whole universe.
    pub fn relabeled(&self, map: &BTreeMap<Elem, Elem>) -> FinStructure {
        let universe: BTreeSet<Elem> = self.universe.iter().map(|e| map[e]).collect();
        assert_eq!(universe.len(), self.universe.len(), "relabeling must be injective");
        let rels = self
            .rels
            .iter()
            .map(|table| {
                table
                    .iter()
                    .map(|t| t.iter().map(|e| map[e]).collect::<Vec<_>>())
                    .collect()
            })
            .collect();
        let funcs = self
            .funcs
            .iter()
            .map(|table| {
                table
                    .iter()
                    .map(|(args, v)| (args.iter().map(|e| map[e]).collect::<Vec<_>>(), map[v]))
                    .collect()
            })
            .collect();
        FinStructure { vocab: self.vocab.clone(), universe, rels, funcs }
    }

    /// First id not used by the universe; handy when adjoining fresh elements.
    pub fn fresh_elem(&self) -> Elem {
        self.universe.iter().next_back().map_or(0, |e| e + 1)
    }
}

/// All tuples of the given length over `domain`, in lexicographic order.
pub fn tuples_over(domain: &[Elem], len: usize) -> Vec<Vec<Elem>> {
    let mut out = alloc::vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * domain.len());
        for prefix in &out {
            for &d in domain {
                let mut t = prefix.clone();
                t.push(d);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// All subsets of `domain`, smallest first, each in ascending order.
pub fn subsets_of(domain: &[Elem]) -> Vec<BTreeSet<Elem>> {
    let mut out: Vec<BTreeSet<Elem>> = alloc::vec![BTreeSet::new()];
    for &d in domain {
        let mut next = out.clone();
        for s in &out {
            let mut t = s.clone();
            t.insert(d);
            next.push(t);
        }
        out = next;
    }
    out.sort_by_key(|s| (s.len(), s.iter().copied().collect::<Vec<_>>()));
    out
}
