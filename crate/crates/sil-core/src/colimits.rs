//! Per-class pushouts and pullbacks, regular-monomorphism certification,
//! effective-square tests, and the exhaustive verifiers built from them.
//!
//! In every built-in class with pushouts, pушouts of (strong) embeddings
//! exist concretely: for sets and graph-like classes the quotiented disjoint
//! union, for the abelian classes the direct sum modulo the antidiagonal of
//! the base. A square is an *effective* pullback square when the induced map
//! from the pushout of its span into its codomain is a regular mono.

use crate::budget::SearchBudget;
use crate::catalog::classes::{
    abelian_direct_sum, abelian_quotient, graph_degree, ClassHandle, ClassKind,
};
use crate::diagrams::{span_diagrams, spans_up_to, AmalgamationDiagram, Span};
use crate::error::EngineError;
use crate::report::{BoundCertificate, CheckReport, Verdict, Witness};
use crate::structures::map::{Embedding, StructMap};
use crate::structures::structure::FinStructure;
use crate::structures::vocab::Elem;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;

/// A pushout square; its codomain is generated by the two leg images, so the
/// mediating map to any competing amalgam is determined elementwise.
#[derive(Debug, Clone, PartialEq)]
pub struct PushoutResult {
    pub cocone: AmalgamationDiagram,
}

impl PushoutResult {
    pub fn apex(&self) -> &Arc<FinStructure> {
        self.cocone.codomain()
    }

    /// The unique map from the pushout into a competing amalgam of the same
    /// span, or an error when no commuting map exists (which certifies the
    /// candidate square is not a cocone over this pushout).
    pub fn mediator(&self, competitor: &AmalgamationDiagram) -> Result<StructMap, EngineError> {
        if !self.cocone.same_span(competitor) {
            return Err(EngineError::SpanMismatch);
        }
        let mut assignment: BTreeMap<Elem, Elem> = BTreeMap::new();
        for x in self.cocone.left().elements() {
            let from = self.cocone.g1().apply(x);
            let to = competitor.g1().apply(x);
            if *assignment.entry(from).or_insert(to) != to {
                return Err(EngineError::InvalidMap("no commuting mediator exists".into()));
            }
        }
        for y in self.cocone.right().elements() {
            let from = self.cocone.g2().apply(y);
            let to = competitor.g2().apply(y);
            if *assignment.entry(from).or_insert(to) != to {
                return Err(EngineError::InvalidMap("no commuting mediator exists".into()));
            }
        }
        if assignment.len() != self.apex().size() {
            return Err(EngineError::InvalidMap(
                "pushout apex is not covered by the leg images".into(),
            ));
        }
        let map = StructMap::new(self.apex().clone(), competitor.codomain().clone(), assignment)?;
        if !map.is_homomorphism() {
            return Err(EngineError::InvalidMap("mediator is not a homomorphism".into()));
        }
        Ok(map)
    }
}

/// The pushout of a span of strong embeddings in the given class.
pub fn pushout(span: &Span, class: &ClassHandle) -> Result<PushoutResult, EngineError> {
    if !class.has_pushouts() {
        return Err(EngineError::Unsupported(alloc::format!(
            "class `{}` does not provide pushouts",
            class.name()
        )));
    }
    match class.kind() {
        ClassKind::VecSpace { .. } | ClassKind::Module { .. } => abelian_pushout(span, class),
        ClassKind::KLocalGraph { kappa: 2 } => klocal2_pushout(span, class),
        _ => glue_pushout(span, class),
    }
}

/// Disjoint union of the two legs glued along the base, relations the union
/// of the images. Universal in the set-like and presheaf-like classes.
fn glue_pushout(span: &Span, _class: &ClassHandle) -> Result<PushoutResult, EngineError> {
    let m1 = span.left().target();
    let m2 = span.right().target();
    let base_right_image: BTreeSet<Elem> = span.right().image();
    // Ids: keep M1's ids; fresh ids for M2 minus the base image.
    let mut fresh = m1.fresh_elem();
    let mut right_map: BTreeMap<Elem, Elem> = BTreeMap::new();
    for x in span.base().elements() {
        right_map.insert(span.right().apply(x), span.left().apply(x));
    }
    for y in m2.elements() {
        if !base_right_image.contains(&y) {
            right_map.insert(y, fresh);
            fresh += 1;
        }
    }
    let mut universe: BTreeSet<Elem> = m1.universe().clone();
    universe.extend(right_map.values().copied());
    let vocab = m1.vocab();
    let mut rels: Vec<BTreeSet<Vec<Elem>>> = Vec::new();
    for r in 0..vocab.relations().len() {
        let mut table = m1.relation(r).clone();
        for t in m2.relation(r) {
            table.insert(t.iter().map(|e| right_map[e]).collect());
        }
        rels.push(table);
    }
    let mut funcs: Vec<BTreeMap<Vec<Elem>, Elem>> = Vec::new();
    for f in 0..vocab.functions().len() {
        let mut table = m1.function(f).clone();
        for (args, v) in m2.function(f) {
            let img: Vec<Elem> = args.iter().map(|e| right_map[e]).collect();
            table.insert(img, right_map[v]);
        }
        funcs.push(table);
    }
    let apex = Arc::new(FinStructure::new(vocab.clone(), universe, rels, funcs)?);
    let g1 = Embedding::from_parts(m1.clone(), apex.clone(), m1.elements().map(|e| (e, e)).collect())?;
    let g2 = Embedding::from_parts(m2.clone(), apex.clone(), right_map)?;
    Ok(PushoutResult { cocone: AmalgamationDiagram::new(span.clone(), g1, g2)? })
}

/// Pushout in graphs of degree < 2: the glued graph, with the pendant
/// neighbours of any overloaded base vertex merged. A vertex can only
/// overflow by having one fresh neighbour on each side, and every cocone
/// must identify those two neighbours, so the merge is forced and unique.
fn klocal2_pushout(span: &Span, class: &ClassHandle) -> Result<PushoutResult, EngineError> {
    let graph_class = crate::catalog::classes::make_class(ClassKind::Graph)?;
    let glued = glue_pushout(span, &graph_class)?;
    let apex = glued.apex();
    let mut merge: BTreeMap<Elem, Elem> = BTreeMap::new();
    for v in apex.elements() {
        if graph_degree(apex, v) > 1 {
            let nbrs: Vec<Elem> = apex
                .relation(0)
                .iter()
                .filter(|t| t[0] == v)
                .map(|t| t[1])
                .collect();
            if nbrs.len() != 2 {
                return Err(EngineError::Unsupported(
                    "span admits no pushout under the degree bound".into(),
                ));
            }
            let (a, b) = (nbrs[0].min(nbrs[1]), nbrs[0].max(nbrs[1]));
            merge.insert(b, a);
        }
    }
    let collapse = |e: Elem| -> Elem { merge.get(&e).copied().unwrap_or(e) };
    let universe: BTreeSet<Elem> = apex.elements().map(collapse).collect();
    let table: BTreeSet<Vec<Elem>> = apex
        .relation(0)
        .iter()
        .map(|t| alloc::vec![collapse(t[0]), collapse(t[1])])
        .filter(|t| t[0] != t[1])
        .collect();
    let merged = Arc::new(FinStructure::relational(
        apex.vocab().clone(),
        universe,
        alloc::vec![table],
    )?);
    if !class.contains(&merged) {
        return Err(EngineError::Unsupported(
            "span admits no pushout under the degree bound".into(),
        ));
    }
    let g1 = Embedding::from_parts(
        span.left().target().clone(),
        merged.clone(),
        glued
            .cocone
            .g1()
            .map()
            .iter()
            .map(|(k, v)| (*k, collapse(*v)))
            .collect(),
    )?;
    let g2 = Embedding::from_parts(
        span.right().target().clone(),
        merged.clone(),
        glued
            .cocone
            .g2()
            .map()
            .iter()
            .map(|(k, v)| (*k, collapse(*v)))
            .collect(),
    )?;
    Ok(PushoutResult { cocone: AmalgamationDiagram::new(span.clone(), g1, g2)? })
}

/// Direct sum of the legs modulo the antidiagonal copy of the base.
fn abelian_pushout(span: &Span, class: &ClassHandle) -> Result<PushoutResult, EngineError> {
    let m1 = span.left().target();
    let m2 = span.right().target();
    let (sum, inj1, inj2) = abelian_direct_sum(m1, m2);
    let add = sum.vocab().function_index("add").unwrap();
    let neg = sum.vocab().function_index("neg").unwrap();
    let diffs: BTreeSet<Elem> = span
        .base()
        .elements()
        .map(|x| {
            let a = inj1[&span.left().apply(x)];
            let b = inj2[&span.right().apply(x)];
            sum.apply(add, &[a, sum.apply(neg, &[b])])
        })
        .collect();
    let d = if diffs.is_empty() {
        let zero = sum.vocab().function_index("zero").unwrap();
        BTreeSet::from([sum.apply(zero, &[])])
    } else {
        sum.generated_subset(&diffs)
    };
    let (q, rep) = abelian_quotient(&sum, &d);
    let apex = Arc::new(q);
    if !class.contains(&apex) {
        return Err(EngineError::Unsupported(
            "pushout leaves the class (exponent violation)".into(),
        ));
    }
    let g1 = Embedding::from_parts(
        m1.clone(),
        apex.clone(),
        m1.elements().map(|x| (x, rep[&inj1[&x]])).collect(),
    )?;
    let g2 = Embedding::from_parts(
        m2.clone(),
        apex.clone(),
        m2.elements().map(|y| (y, rep[&inj2[&y]])).collect(),
    )?;
    Ok(PushoutResult { cocone: AmalgamationDiagram::new(span.clone(), g1, g2)? })
}

/// The pullback of a cospan of embeddings: the intersection of the two
/// images with the structure induced by the common codomain.
#[derive(Debug, Clone, PartialEq)]
pub struct PullbackResult {
    pub apex: Arc<FinStructure>,
    pub span: Span,
}

pub fn pullback(g1: &Embedding, g2: &Embedding) -> Result<PullbackResult, EngineError> {
    if g1.target() != g2.target() {
        return Err(EngineError::InvalidMap("pullback needs a shared codomain".into()));
    }
    let n = g1.target();
    let common: BTreeSet<Elem> = g1.image().intersection(&g2.image()).copied().collect();
    let apex = Arc::new(n.substructure_on(&common).ok_or_else(|| {
        EngineError::InvalidStructure("image intersection is not function-closed".into())
    })?);
    let into_left = Embedding::from_parts(
        apex.clone(),
        g1.source().clone(),
        common.iter().map(|&w| (w, g1.preimage(w).unwrap())).collect(),
    )?;
    let into_right = Embedding::from_parts(
        apex.clone(),
        g2.source().clone(),
        common.iter().map(|&w| (w, g2.preimage(w).unwrap())).collect(),
    )?;
    Ok(PullbackResult { apex, span: Span::new(into_left, into_right)? })
}

/// Per-class regular-monomorphism certification.
///
/// In sets, presheaf categories and abelian categories every monomorphism is
/// regular; in graph-like classes the regular monos are exactly the full
/// (relation-reflecting) embeddings. Classes without a registered
/// characterization report `Inconclusive`.
pub fn is_regular_mono(f: &StructMap, class: &ClassHandle) -> Verdict {
    if !(f.is_injective() && f.is_homomorphism()) {
        return Verdict::Fails;
    }
    match class.kind() {
        ClassKind::FinSet
        | ClassKind::Multigraph
        | ClassKind::VecSpace { .. }
        | ClassKind::Module { .. } => Verdict::Holds,
        ClassKind::Graph | ClassKind::KLocalGraph { .. } => {
            if f.reflects_relations() {
                Verdict::Holds
            } else {
                Verdict::Fails
            }
        }
        ClassKind::User { .. } => Verdict::Inconclusive,
    }
}

/// Is the square a pullback: do the two leg images intersect exactly in the
/// base image? (The induced structure on that intersection automatically
/// agrees with the base, because the arrows reflect relations.)
pub fn is_pullback_square(d: &AmalgamationDiagram) -> bool {
    let li = d.left_image();
    let ri = d.right_image();
    let common: BTreeSet<Elem> = li.intersection(&ri).copied().collect();
    common == d.base_image()
}

/// Verdict of the effective-square test.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveSquareVerdict {
    pub is_pullback: bool,
    pub induced_map_regular: Verdict,
    /// The mediating map from the pushout into the square's codomain, when
    /// one exists.
    pub mediator: Option<StructMap>,
}

impl EffectiveSquareVerdict {
    pub fn holds(&self) -> bool {
        self.induced_map_regular == Verdict::Holds
    }
}

/// Compute the pushout of the span, mediate into the square's codomain, and
/// certify regularity of the induced map.
pub fn is_effective_square(
    d: &AmalgamationDiagram,
    class: &ClassHandle,
) -> Result<EffectiveSquareVerdict, EngineError> {
    let p = pushout(d.span(), class)?;
    match p.mediator(d) {
        Ok(mediator) => {
            let reg = is_regular_mono(&mediator, class);
            Ok(EffectiveSquareVerdict {
                is_pullback: is_pullback_square(d),
                induced_map_regular: reg,
                mediator: Some(mediator),
            })
        }
        Err(_) => Ok(EffectiveSquareVerdict {
            is_pullback: is_pullback_square(d),
            induced_map_regular: Verdict::Fails,
            mediator: None,
        }),
    }
}

/// Exhaustively check that every pushout square of regular monos among
/// members of size at most `max_size` is a pullback square.
pub fn verify_ringel(class: &ClassHandle, max_size: usize) -> CheckReport {
    if !class.has_pushouts() {
        return CheckReport::inconclusive(
            alloc::format!("class `{}` does not provide pushouts", class.name()),
            0,
        );
    }
    let mut configs = 0u64;
    for span in spans_up_to(class, max_size) {
        if crate::budget::abort_requested() {
            return CheckReport::inconclusive("aborted by resource cap", configs);
        }
        configs += 1;
        let po = match pushout(&span, class) {
            Ok(po) => po,
            Err(_) => continue, // span without a pushout constrains nothing
        };
        if !is_pullback_square(&po.cocone) {
            return CheckReport::fails(
                alloc::vec![Witness::diagram("pushout square that is not a pullback", po.cocone)],
                configs,
                Some(BoundCertificate::sizes(max_size)),
            );
        }
    }
    CheckReport::holds(BoundCertificate::sizes(max_size), configs)
}

/// Exhaustively test effectiveness of every pullback square of regular monos
/// within the bound; fails with the first violating square.
pub fn check_effective_unions(class: &ClassHandle, max_size: usize) -> CheckReport {
    if !class.has_pushouts() {
        return CheckReport::inconclusive(
            alloc::format!("class `{}` does not provide pushouts", class.name()),
            0,
        );
    }
    let budget = SearchBudget { max_codomain_size: max_size, max_depth: 1 };
    let mut configs = 0u64;
    for span in spans_up_to(class, max_size) {
        let diagrams = match span_diagrams(&span, class, budget) {
            Ok(ds) => ds,
            Err(_) => return CheckReport::inconclusive("class does not support amalgam enumeration", configs),
        };
        for d in diagrams {
            if crate::budget::abort_requested() {
                return CheckReport::inconclusive("aborted by resource cap", configs);
            }
            if !is_pullback_square(&d) {
                continue;
            }
            configs += 1;
            match is_effective_square(&d, class) {
                Ok(v) if v.holds() => {}
                Ok(v) => {
                    let mut witnesses =
                        alloc::vec![Witness::diagram("pullback square that is not effective", d)];
                    if let Some(m) = v.mediator {
                        witnesses.push(Witness::map("non-regular mediating map", m));
                    }
                    return CheckReport::fails(
                        witnesses,
                        configs,
                        Some(BoundCertificate::with_budget(max_size, budget)),
                    );
                }
                Err(e) => {
                    return CheckReport::inconclusive(alloc::format!("{e}"), configs);
                }
            }
        }
    }
    CheckReport::holds(BoundCertificate::with_budget(max_size, budget), configs)
}
