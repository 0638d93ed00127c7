//! Spans, amalgamation diagrams, bounded amalgam enumeration, and the
//! equivalence of amalgams decided by bounded search.
//!
//! An amalgam of a span `(f1: M0 -> M1, f2: M0 -> M2)` is a cospan
//! `(g1: M1 -> N, g2: M2 -> N)` closing the square. Two amalgams of one span
//! are equivalent when a further cocone merges them commutatively; the full
//! equivalence is the transitive closure of that one-step relation, and in
//! classes with amalgamation one step already suffices.

use crate::budget::SearchBudget;
use crate::catalog::classes::{abelian_direct_sum, abelian_quotient, subgroups, ClassHandle};
use crate::error::EngineError;
use crate::report::Verdict;
use crate::structures::canon::{Coloring, IsoClasses};
use crate::structures::map::Embedding;
use crate::structures::structure::FinStructure;
use crate::structures::vocab::Elem;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;

/// A span of embeddings with a common source (the base).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Span {
    f1: Embedding,
    f2: Embedding,
}

impl Span {
    pub fn new(f1: Embedding, f2: Embedding) -> Result<Self, EngineError> {
        if f1.source() != f2.source() {
            return Err(EngineError::SpanMismatch);
        }
        Ok(Span { f1, f2 })
    }

    pub fn base(&self) -> &Arc<FinStructure> {
        self.f1.source()
    }

    pub fn left(&self) -> &Embedding {
        &self.f1
    }

    pub fn right(&self) -> &Embedding {
        &self.f2
    }

    pub fn swapped(&self) -> Span {
        Span { f1: self.f2.clone(), f2: self.f1.clone() }
    }
}

/// A commuting square over a span: `g1 . f1 = g2 . f2`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AmalgamationDiagram {
    span: Span,
    g1: Embedding,
    g2: Embedding,
}

impl AmalgamationDiagram {
    pub fn new(span: Span, g1: Embedding, g2: Embedding) -> Result<Self, EngineError> {
        if g1.source() != span.f1.target()
            || g2.source() != span.f2.target()
            || g1.target() != g2.target()
        {
            return Err(EngineError::InvalidMap("amalgam endpoints do not match the span".into()));
        }
        let through_left = span.f1.then(&g1)?;
        let through_right = span.f2.then(&g2)?;
        if through_left.map() != through_right.map() {
            return Err(EngineError::InvalidMap("amalgamation square does not commute".into()));
        }
        Ok(AmalgamationDiagram { span, g1, g2 })
    }

    /// Square with all arrows identities on `m`.
    pub fn identity(m: Arc<FinStructure>) -> Self {
        let id = Embedding::identity(m);
        AmalgamationDiagram { span: Span { f1: id.clone(), f2: id.clone() }, g1: id.clone(), g2: id }
    }

    pub fn span(&self) -> &Span {
        &self.span
    }

    pub fn g1(&self) -> &Embedding {
        &self.g1
    }

    pub fn g2(&self) -> &Embedding {
        &self.g2
    }

    pub fn base(&self) -> &Arc<FinStructure> {
        self.span.base()
    }

    pub fn left(&self) -> &Arc<FinStructure> {
        self.span.f1.target()
    }

    pub fn right(&self) -> &Arc<FinStructure> {
        self.span.f2.target()
    }

    pub fn codomain(&self) -> &Arc<FinStructure> {
        self.g1.target()
    }

    /// Swap the two legs: `(f1, g1)` with `(f2, g2)`. An involution.
    pub fn dual(&self) -> AmalgamationDiagram {
        AmalgamationDiagram {
            span: self.span.swapped(),
            g1: self.g2.clone(),
            g2: self.g1.clone(),
        }
    }

    pub fn same_span(&self, other: &AmalgamationDiagram) -> bool {
        self.span == other.span
    }

    pub fn base_image(&self) -> BTreeSet<Elem> {
        self.span
            .base()
            .elements()
            .map(|x| self.g1.apply(self.span.f1.apply(x)))
            .collect()
    }

    pub fn left_image(&self) -> BTreeSet<Elem> {
        self.g1.image()
    }

    pub fn right_image(&self) -> BTreeSet<Elem> {
        self.g2.image()
    }

    /// Are all four structures members and all four arrows strong?
    pub fn is_strong_in(&self, class: &ClassHandle) -> bool {
        class.is_strong(&self.span.f1)
            && class.is_strong(&self.span.f2)
            && class.is_strong(&self.g1)
            && class.is_strong(&self.g2)
    }

    /// Colors that pin the span arrows elementwise; two diagrams over the
    /// same span are isomorphic fixing the span iff a color-respecting
    /// isomorphism of their codomains exists.
    pub fn span_colors(&self) -> Coloring {
        let inv1: BTreeMap<Elem, Elem> = self.g1.map().iter().map(|(k, v)| (*v, *k)).collect();
        let inv2: BTreeMap<Elem, Elem> = self.g2.map().iter().map(|(k, v)| (*v, *k)).collect();
        self.codomain()
            .elements()
            .map(|e| {
                let a = inv1.get(&e).map_or(0u64, |p| *p as u64 + 1);
                let b = inv2.get(&e).map_or(0u64, |p| *p as u64 + 1);
                (e, (a << 32) | b)
            })
            .collect()
    }
}

/// A cocone merging two structures along a seed correspondence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cocone {
    pub codomain: Arc<FinStructure>,
    pub left: Embedding,
    pub right: Embedding,
}

/// All tight cocones over `(a, b)` extending `seed` (pairs `a`-elem ->
/// `b`-elem that must be identified), with codomain size at most `max_size`.
/// Tight means the codomain is generated by the two images, so this is
/// exhaustive for cocone existence: every cocone restricts to a tight one.
///
/// Returns `None` when the class does not support cocone enumeration; the
/// boolean is false when some configurations had to be skipped (only
/// possible for user classes with unmanageably many free relation slots).
pub fn enumerate_cocones(
    a: &Arc<FinStructure>,
    b: &Arc<FinStructure>,
    seed: &BTreeMap<Elem, Elem>,
    class: &ClassHandle,
    max_size: usize,
    first_only: bool,
) -> Option<(Vec<Cocone>, bool)> {
    if class.glue_enumerable() {
        Some(enumerate_glue_cocones(a, b, seed, class, max_size, first_only))
    } else if class.vocab().function_index("add").is_some() {
        Some((abelian_cocones(a, b, seed, class, max_size, first_only), true))
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum GlueLabel {
    Left(Elem),
    Right(Elem),
}

/// Union-find over glue labels.
struct Partition {
    parent: BTreeMap<GlueLabel, GlueLabel>,
}

impl Partition {
    fn new(labels: impl Iterator<Item = GlueLabel>) -> Self {
        Partition { parent: labels.map(|l| (l, l)).collect() }
    }

    fn find(&mut self, l: GlueLabel) -> GlueLabel {
        let p = self.parent[&l];
        if p == l {
            return l;
        }
        let root = self.find(p);
        self.parent.insert(l, root);
        root
    }

    fn union(&mut self, a: GlueLabel, b: GlueLabel) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent.insert(hi, lo);
        }
    }

    fn classes(&mut self) -> BTreeMap<GlueLabel, Vec<GlueLabel>> {
        let labels: Vec<GlueLabel> = self.parent.keys().copied().collect();
        let mut out: BTreeMap<GlueLabel, Vec<GlueLabel>> = BTreeMap::new();
        for l in labels {
            let r = self.find(l);
            out.entry(r).or_default().push(l);
        }
        out
    }
}

/// Close a pairing under function congruence and validate injectivity of
/// both legs: each class may contain at most one Left and one Right label.
/// Returns the classes keyed by root, or `None` if invalid.
fn close_pairing(
    a: &FinStructure,
    b: &FinStructure,
    pairs: &BTreeSet<(Elem, Elem)>,
) -> Option<BTreeMap<GlueLabel, Vec<GlueLabel>>> {
    let labels = a
        .elements()
        .map(GlueLabel::Left)
        .chain(b.elements().map(GlueLabel::Right));
    let mut part = Partition::new(labels);
    let mut queue: Vec<(Elem, Elem)> = pairs.iter().copied().collect();
    // Constants must always be identified.
    for f in 0..a.vocab().functions().len() {
        if a.vocab().function_arity(f) == 0 {
            queue.push((a.apply(f, &[]), b.apply(f, &[])));
        }
    }
    while let Some((x, y)) = queue.pop() {
        let (lx, ly) = (GlueLabel::Left(x), GlueLabel::Right(y));
        if part.find(lx) == part.find(ly) {
            continue;
        }
        part.union(lx, ly);
        // Congruence: merging x ~ y forces f(x) ~ f(y) for unary rows and
        // in general any rows whose argument classes now coincide. For the
        // vocabularies handled here (unary functions at most), rows indexed
        // by the merged elements suffice.
        for f in 0..a.vocab().functions().len() {
            if a.vocab().function_arity(f) == 1 {
                queue.push((a.apply(f, &[x]), b.apply(f, &[y])));
            }
        }
    }
    let classes = part.classes();
    for members in classes.values() {
        let lefts = members.iter().filter(|l| matches!(l, GlueLabel::Left(_))).count();
        let rights = members.len() - lefts;
        if lefts > 1 || rights > 1 {
            return None;
        }
    }
    Some(classes)
}

fn glue_from_classes(
    a: &Arc<FinStructure>,
    b: &Arc<FinStructure>,
    classes: &BTreeMap<GlueLabel, Vec<GlueLabel>>,
    extra_tuples: &[(usize, Vec<Elem>)],
    ids: &BTreeMap<GlueLabel, Elem>,
    class: &ClassHandle,
) -> Option<Cocone> {
    let universe: BTreeSet<Elem> = ids.values().copied().collect();
    let left_map: BTreeMap<Elem, Elem> = a
        .elements()
        .map(|x| (x, ids[&classes_root(classes, GlueLabel::Left(x))]))
        .collect();
    let right_map: BTreeMap<Elem, Elem> = b
        .elements()
        .map(|y| (y, ids[&classes_root(classes, GlueLabel::Right(y))]))
        .collect();
    let left_image: BTreeSet<Elem> = left_map.values().copied().collect();
    let right_image: BTreeSet<Elem> = right_map.values().copied().collect();
    let vocab = a.vocab();
    let mut rels: Vec<BTreeSet<Vec<Elem>>> = Vec::with_capacity(vocab.relations().len());
    for r in 0..vocab.relations().len() {
        let mut table: BTreeSet<Vec<Elem>> = BTreeSet::new();
        for t in a.relation(r) {
            table.insert(t.iter().map(|e| left_map[e]).collect());
        }
        for t in b.relation(r) {
            table.insert(t.iter().map(|e| right_map[e]).collect());
        }
        for (rel, t) in extra_tuples {
            if *rel == r {
                table.insert(t.clone());
            }
        }
        rels.push(table);
    }
    // Reflection consistency: a table tuple lying inside an image must come
    // from that side's relation.
    let inv_left: BTreeMap<Elem, Elem> = left_map.iter().map(|(k, v)| (*v, *k)).collect();
    let inv_right: BTreeMap<Elem, Elem> = right_map.iter().map(|(k, v)| (*v, *k)).collect();
    for (r, table) in rels.iter().enumerate() {
        for t in table {
            if t.iter().all(|e| left_image.contains(e)) {
                let pre: Vec<Elem> = t.iter().map(|e| inv_left[e]).collect();
                if !a.has_tuple(r, &pre) {
                    return None;
                }
            }
            if t.iter().all(|e| right_image.contains(e)) {
                let pre: Vec<Elem> = t.iter().map(|e| inv_right[e]).collect();
                if !b.has_tuple(r, &pre) {
                    return None;
                }
            }
        }
    }
    let mut funcs: Vec<BTreeMap<Vec<Elem>, Elem>> = Vec::with_capacity(vocab.functions().len());
    for f in 0..vocab.functions().len() {
        let mut table: BTreeMap<Vec<Elem>, Elem> = BTreeMap::new();
        for (args, v) in a.function(f) {
            let img: Vec<Elem> = args.iter().map(|e| left_map[e]).collect();
            let val = left_map[v];
            if let Some(&existing) = table.get(&img) {
                if existing != val {
                    return None;
                }
            }
            table.insert(img, val);
        }
        for (args, v) in b.function(f) {
            let img: Vec<Elem> = args.iter().map(|e| right_map[e]).collect();
            let val = right_map[v];
            if let Some(&existing) = table.get(&img) {
                if existing != val {
                    return None;
                }
            }
            table.insert(img, val);
        }
        // Totality: arity >= 1 functions must cover the whole universe; with
        // at most unary functions in the glue-enumerable vocabularies every
        // element comes from a side, so the tables are already total.
        let arity = vocab.function_arity(f);
        if arity >= 1 && table.len() != universe.len().pow(arity as u32) {
            return None;
        }
        funcs.push(table);
    }
    let n = FinStructure::new(vocab.clone(), universe, rels, funcs).ok()?;
    if !class.contains(&n) {
        return None;
    }
    let n = Arc::new(n);
    let left = Embedding::from_parts(a.clone(), n.clone(), left_map).ok()?;
    let right = Embedding::from_parts(b.clone(), n.clone(), right_map).ok()?;
    Some(Cocone { codomain: n, left, right })
}

fn classes_root(
    classes: &BTreeMap<GlueLabel, Vec<GlueLabel>>,
    label: GlueLabel,
) -> GlueLabel {
    *classes
        .iter()
        .find(|(_, members)| members.contains(&label))
        .expect("label belongs to some class")
        .0
}

fn enumerate_glue_cocones(
    a: &Arc<FinStructure>,
    b: &Arc<FinStructure>,
    seed: &BTreeMap<Elem, Elem>,
    class: &ClassHandle,
    max_size: usize,
    first_only: bool,
) -> (Vec<Cocone>, bool) {
    let mut out = Vec::new();
    let mut complete = true;
    let seed_pairs: BTreeSet<(Elem, Elem)> = seed.iter().map(|(k, v)| (*k, *v)).collect();
    let Some(base_classes) = close_pairing(a, b, &seed_pairs) else {
        return (out, complete);
    };
    // Candidate extra identifications: left classes without a right label
    // matched to right classes without a left label.
    let free_left: Vec<Elem> = base_classes
        .values()
        .filter(|m| m.iter().all(|l| matches!(l, GlueLabel::Left(_))))
        .map(|m| match m[0] {
            GlueLabel::Left(x) => x,
            GlueLabel::Right(_) => unreachable!(),
        })
        .collect();
    let free_right: Vec<Elem> = base_classes
        .values()
        .filter(|m| m.iter().all(|l| matches!(l, GlueLabel::Right(_))))
        .map(|m| match m[0] {
            GlueLabel::Right(y) => y,
            GlueLabel::Left(_) => unreachable!(),
        })
        .collect();
    let mut partitions: BTreeSet<BTreeSet<(Elem, Elem)>> = BTreeSet::new();
    let mut matchings: Vec<BTreeSet<(Elem, Elem)>> = Vec::new();
    collect_matchings(&free_left, &free_right, &mut BTreeSet::new(), &mut matchings);
    for extra in matchings {
        let mut pairs = seed_pairs.clone();
        pairs.extend(extra.iter().copied());
        let Some(classes) = close_pairing(a, b, &pairs) else { continue };
        if classes.len() > max_size {
            continue;
        }
        // The closure may coincide for different matchings; keep one copy.
        let normalized: BTreeSet<(Elem, Elem)> = classes
            .values()
            .filter_map(|m| {
                let l = m.iter().find_map(|x| match x {
                    GlueLabel::Left(e) => Some(*e),
                    _ => None,
                })?;
                let r = m.iter().find_map(|x| match x {
                    GlueLabel::Right(e) => Some(*e),
                    _ => None,
                })?;
                Some((l, r))
            })
            .collect();
        if !partitions.insert(normalized) {
            continue;
        }
        let ids: BTreeMap<GlueLabel, Elem> = classes
            .keys()
            .enumerate()
            .map(|(i, root)| (*root, i as Elem))
            .collect();
        // Free relation slots: tuples not confined to either image.
        let left_classes: BTreeSet<Elem> = classes
            .iter()
            .filter(|(_, m)| m.iter().any(|l| matches!(l, GlueLabel::Left(_))))
            .map(|(root, _)| ids[root])
            .collect();
        let right_classes: BTreeSet<Elem> = classes
            .iter()
            .filter(|(_, m)| m.iter().any(|l| matches!(l, GlueLabel::Right(_))))
            .map(|(root, _)| ids[root])
            .collect();
        let universe: Vec<Elem> = ids.values().copied().collect();
        let symmetric = class.symmetric_binary_relations();
        let mut slots: Vec<Vec<(usize, Vec<Elem>)>> = Vec::new();
        for r in 0..a.vocab().relations().len() {
            let arity = a.vocab().relation_arity(r);
            for t in crate::structures::structure::tuples_over(&universe, arity) {
                let fully_left = t.iter().all(|e| left_classes.contains(e));
                let fully_right = t.iter().all(|e| right_classes.contains(e));
                if fully_left || fully_right {
                    continue;
                }
                if symmetric.contains(&r) {
                    // One slot per unordered pair; insert both orientations.
                    if t[0] > t[1] {
                        continue;
                    }
                    slots.push(alloc::vec![
                        (r, t.clone()),
                        (r, alloc::vec![t[1], t[0]])
                    ]);
                } else {
                    slots.push(alloc::vec![(r, t)]);
                }
            }
        }
        if slots.len() > 20 {
            // Too many free slots to enumerate exhaustively; mark the run
            // incomplete. Does not arise for the built-in classes.
            complete = false;
            continue;
        }
        for choice_mask in 0..(1u64 << slots.len()) {
            let mut extra_tuples: Vec<(usize, Vec<Elem>)> = Vec::new();
            for (i, slot) in slots.iter().enumerate() {
                if choice_mask & (1 << i) != 0 {
                    extra_tuples.extend(slot.iter().cloned());
                }
            }
            if let Some(cocone) =
                glue_from_classes(a, b, &classes, &extra_tuples, &ids, class)
            {
                out.push(cocone);
                if first_only {
                    return (out, complete);
                }
            }
        }
    }
    (out, complete)
}

fn collect_matchings(
    lefts: &[Elem],
    rights: &[Elem],
    current: &mut BTreeSet<(Elem, Elem)>,
    out: &mut Vec<BTreeSet<(Elem, Elem)>>,
) {
    let Some((&l, rest)) = lefts.split_first() else {
        out.push(current.clone());
        return;
    };
    // Leave `l` unmatched first: minimal identifications come first.
    collect_matchings(rest, rights, current, out);
    for &r in rights {
        if current.iter().any(|&(_, r0)| r0 == r) {
            continue;
        }
        current.insert((l, r));
        collect_matchings(rest, rights, current, out);
        current.remove(&(l, r));
    }
}

/// Abelian cocones over `(a, b)` with `seed` identified: quotients of the
/// direct sum by subgroups containing the seed differences whose kernel
/// meets neither summand.
fn abelian_cocones(
    a: &Arc<FinStructure>,
    b: &Arc<FinStructure>,
    seed: &BTreeMap<Elem, Elem>,
    class: &ClassHandle,
    max_size: usize,
    first_only: bool,
) -> Vec<Cocone> {
    let mut out = Vec::new();
    let (sum, inj_a, inj_b) = abelian_direct_sum(a, b);
    let add = sum.vocab().function_index("add").unwrap();
    let neg = sum.vocab().function_index("neg").unwrap();
    // Subgroup generated by (x, -seed(x)).
    let diffs: BTreeSet<Elem> = seed
        .iter()
        .map(|(&x, &y)| sum.apply(add, &[inj_a[&x], sum.apply(neg, &[inj_b[&y]])]))
        .collect();
    let d0 = sum.generated_subset(&if diffs.is_empty() {
        BTreeSet::from([sum.apply(sum.vocab().function_index("zero").unwrap(), &[])])
    } else {
        diffs
    });
    let a_image: BTreeSet<Elem> = inj_a.values().copied().collect();
    let b_image: BTreeSet<Elem> = inj_b.values().copied().collect();
    let zero = sum.apply(sum.vocab().function_index("zero").unwrap(), &[]);
    for d in subgroups(&sum) {
        if !d0.iter().all(|x| d.contains(x)) {
            continue;
        }
        let ka = d.intersection(&a_image).count();
        let kb = d.intersection(&b_image).count();
        // Kernel must meet each summand only in zero, else a leg collapses.
        if ka > 1 || kb > 1 || !d.contains(&zero) {
            continue;
        }
        if sum.size() / d.len() > max_size {
            continue;
        }
        let (q, rep) = abelian_quotient(&sum, &d);
        let q = Arc::new(q);
        if !class.contains(&q) {
            continue;
        }
        let left = Embedding::from_parts(
            a.clone(),
            q.clone(),
            a.elements().map(|x| (x, rep[&inj_a[&x]])).collect(),
        );
        let right = Embedding::from_parts(
            b.clone(),
            q.clone(),
            b.elements().map(|y| (y, rep[&inj_b[&y]])).collect(),
        );
        if let (Ok(left), Ok(right)) = (left, right) {
            out.push(Cocone { codomain: q, left, right });
            if first_only {
                return out;
            }
        }
    }
    out
}

/// All tight amalgams of a span: cocones over `(M1, M2)` identifying the two
/// base images. Deduplicated by construction: distinct tight amalgams are
/// never isomorphic fixing the span. Every amalgam within the size bound is
/// equivalent to (indeed, extends) a tight one.
pub fn enumerate_amalgams(
    span: &Span,
    class: &ClassHandle,
    budget: SearchBudget,
) -> Result<Vec<AmalgamationDiagram>, EngineError> {
    enumerate_amalgams_full(span, class, budget).map(|(v, _)| v)
}

/// As [`enumerate_amalgams`], also reporting whether the enumeration was
/// exhaustive (it always is for the built-in classes).
pub fn enumerate_amalgams_full(
    span: &Span,
    class: &ClassHandle,
    budget: SearchBudget,
) -> Result<(Vec<AmalgamationDiagram>, bool), EngineError> {
    let seed: BTreeMap<Elem, Elem> = span
        .base()
        .elements()
        .map(|x| (span.left().apply(x), span.right().apply(x)))
        .collect();
    let (cocones, complete) = enumerate_cocones(
        span.left().target(),
        span.right().target(),
        &seed,
        class,
        budget.max_codomain_size,
        false,
    )
    .ok_or_else(|| EngineError::Unsupported(alloc::format!(
        "class `{}` does not support amalgam enumeration",
        class.name()
    )))?;
    let mut out: Vec<AmalgamationDiagram> = cocones
        .into_iter()
        .map(|c| {
            AmalgamationDiagram::new(span.clone(), c.left, c.right)
                .expect("tight cocone closes the square")
        })
        .collect();
    out.sort_by(|x, y| {
        (x.codomain().size(), x.codomain().clone())
            .cmp(&(y.codomain().size(), y.codomain().clone()))
    });
    Ok((out, complete))
}

/// Every diagram over the span within the budget, up to isomorphism fixing
/// the span: each tight amalgam composed with each strong extension of its
/// codomain.
pub fn span_diagrams(
    span: &Span,
    class: &ClassHandle,
    budget: SearchBudget,
) -> Result<Vec<AmalgamationDiagram>, EngineError> {
    let mut out = Vec::new();
    for tight in enumerate_amalgams(span, class, budget)? {
        for ext in class.extensions(tight.codomain(), budget.max_codomain_size) {
            let g1 = tight.g1().then(&ext).expect("codomains match");
            let g2 = tight.g2().then(&ext).expect("codomains match");
            out.push(AmalgamationDiagram { span: span.clone(), g1, g2 });
        }
    }
    Ok(out)
}

/// Representatives of all spans (ordered pairs of strong embeddings out of a
/// common base) among members of size at most `max_size`, up to isomorphism
/// of spans.
pub fn spans_up_to(class: &ClassHandle, max_size: usize) -> Vec<Span> {
    let members = class.members_up_to(max_size);
    let mut classes = IsoClasses::new();
    let mut out = Vec::new();
    for m1 in &members {
        for subset in class.strong_subsets(m1) {
            let Some(base) = m1.substructure_on(&subset) else { continue };
            if !class.contains(&base) {
                continue;
            }
            let base = Arc::new(base);
            let f1 = Embedding::inclusion(base.clone(), m1.clone()).expect("induced inclusion");
            for m2 in &members {
                for f2 in crate::structures::map::enumerate_embeddings(&base, m2) {
                    let span = Span { f1: f1.clone(), f2 };
                    let key = span_key_structure(&span);
                    if classes.classify(&Arc::new(key), &Coloring::new()).1 {
                        out.push(span);
                    }
                }
            }
        }
    }
    out
}

/// Encode a span as a single relational structure for isomorphism testing:
/// the disjoint union of `M1` and `M2` with side markers, base pairing, and
/// function graphs turned into relations.
fn span_key_structure(span: &Span) -> FinStructure {
    let m1 = span.left().target();
    let m2 = span.right().target();
    let vocab = m1.vocab();
    let offset = m1.universe().iter().next_back().map_or(0, |e| e + 1);
    let mut relations: Vec<(alloc::string::String, usize)> = vocab.relations().to_vec();
    for (name, arity) in vocab.functions() {
        relations.push((alloc::format!("graph_of_{name}"), arity + 1));
    }
    relations.push(("side_left".into(), 1));
    relations.push(("side_right".into(), 1));
    relations.push(("base_pair".into(), 2));
    let key_vocab = Arc::new(crate::structures::vocab::Vocabulary::new(relations, Vec::new()).unwrap());
    let mut universe: BTreeSet<Elem> = m1.universe().clone();
    universe.extend(m2.elements().map(|e| e + offset));
    let mut tables: Vec<BTreeSet<Vec<Elem>>> = Vec::new();
    for r in 0..vocab.relations().len() {
        let mut t: BTreeSet<Vec<Elem>> = m1.relation(r).clone();
        for tuple in m2.relation(r) {
            t.insert(tuple.iter().map(|e| e + offset).collect());
        }
        tables.push(t);
    }
    for f in 0..vocab.functions().len() {
        let mut t: BTreeSet<Vec<Elem>> = BTreeSet::new();
        for (args, v) in m1.function(f) {
            let mut row = args.clone();
            row.push(*v);
            t.insert(row);
        }
        for (args, v) in m2.function(f) {
            let mut row: Vec<Elem> = args.iter().map(|e| e + offset).collect();
            row.push(v + offset);
            t.insert(row);
        }
        tables.push(t);
    }
    tables.push(m1.elements().map(|e| alloc::vec![e]).collect());
    tables.push(m2.elements().map(|e| alloc::vec![e + offset]).collect());
    tables.push(
        span.base()
            .elements()
            .map(|x| alloc::vec![span.left().apply(x), span.right().apply(x) + offset])
            .collect(),
    );
    FinStructure::relational(key_vocab, universe, tables).expect("valid span encoding")
}

/// Shared state across equivalence queries in one sweep: caches the
/// per-bound amalgamation check that licenses conclusive failure verdicts.
#[derive(Debug, Default)]
pub struct EquivCtx {
    ap_at_bound: BTreeMap<usize, bool>,
}

impl EquivCtx {
    pub fn new() -> Self {
        EquivCtx::default()
    }
}

/// Does every span among members of size at most `bound` have an amalgam?
/// The amalgam search runs at the joint size a tight amalgam can need, so
/// this is the honest bounded form of the amalgamation property. Checked
/// exhaustively and cached.
pub fn amalgamation_at_bound(class: &ClassHandle, bound: usize, ctx: &mut EquivCtx) -> bool {
    if let Some(&v) = ctx.ap_at_bound.get(&bound) {
        return v;
    }
    let ok = spans_up_to(class, bound).iter().all(|span| {
        let seed: BTreeMap<Elem, Elem> = span
            .base()
            .elements()
            .map(|x| (span.left().apply(x), span.right().apply(x)))
            .collect();
        let joint = class.joint_size_bound(
            span.left().target().size(),
            span.right().target().size(),
        );
        enumerate_cocones(span.left().target(), span.right().target(), &seed, class, joint, true)
            .map_or(false, |(found, _)| !found.is_empty())
    });
    ctx.ap_at_bound.insert(bound, ok);
    ok
}

/// Decide equivalence of two amalgams of the same span by bounded search.
///
/// `Holds` comes with the witnessing cocone. `Fails` is only reported when
/// the tight-cocone enumeration was exhaustive (the budget covers the joint
/// size, so absence at the bound is absence outright) and the class has
/// amalgamation at the bound, which makes one step of the equivalence
/// already transitive. Anything else is `Inconclusive`.
pub fn amalgams_equivalent(
    d1: &AmalgamationDiagram,
    d2: &AmalgamationDiagram,
    class: &ClassHandle,
    budget: SearchBudget,
    ctx: &mut EquivCtx,
) -> Result<(Verdict, Option<Cocone>), EngineError> {
    if !d1.same_span(d2) {
        return Err(EngineError::SpanMismatch);
    }
    let (first, step_complete) = one_step_witness(d1, d2, class, budget.max_codomain_size)?;
    if let Some(c) = first {
        return Ok((Verdict::Holds, Some(c)));
    }
    let joint = class.joint_size_bound(d1.codomain().size(), d2.codomain().size());
    let exhaustive = step_complete && budget.max_codomain_size >= joint;
    let ap = amalgamation_at_bound(class, budget.max_codomain_size.min(joint), ctx);
    if budget.max_depth > 1 && !ap {
        // Chase chains through intermediate amalgams within the budget.
        let nodes = span_diagrams(d1.span(), class, budget)?;
        let locate = |d: &AmalgamationDiagram| -> Option<usize> {
            nodes.iter().position(|n| iso_fixing_span(n, d))
        };
        if let (Some(start), Some(goal)) = (locate(d1), locate(d2)) {
            if start == goal {
                return Ok((Verdict::Holds, None));
            }
            let mut reached: BTreeSet<usize> = BTreeSet::from([start]);
            let mut frontier: Vec<usize> = alloc::vec![start];
            for _ in 1..budget.max_depth {
                let mut next = Vec::new();
                for &i in &frontier {
                    for (j, node) in nodes.iter().enumerate() {
                        if reached.contains(&j) {
                            continue;
                        }
                        if one_step_witness(&nodes[i], node, class, budget.max_codomain_size)?
                            .0
                            .is_some()
                        {
                            reached.insert(j);
                            next.push(j);
                        }
                    }
                }
                if reached.contains(&goal) {
                    return Ok((Verdict::Holds, None));
                }
                frontier = next;
            }
        }
    }
    if exhaustive && ap {
        Ok((Verdict::Fails, None))
    } else {
        Ok((Verdict::Inconclusive, None))
    }
}

/// Search for a single cocone merging the two amalgams commutatively.
/// Returns the witness (if any) and whether the search was exhaustive.
fn one_step_witness(
    d1: &AmalgamationDiagram,
    d2: &AmalgamationDiagram,
    class: &ClassHandle,
    max_size: usize,
) -> Result<(Option<Cocone>, bool), EngineError> {
    let mut seed: BTreeMap<Elem, Elem> = BTreeMap::new();
    for x in d1.left().elements() {
        let (a, b) = (d1.g1().apply(x), d2.g1().apply(x));
        if let Some(&prev) = seed.get(&a) {
            if prev != b {
                return Ok((None, true));
            }
        }
        seed.insert(a, b);
    }
    for y in d1.right().elements() {
        let (a, b) = (d1.g2().apply(y), d2.g2().apply(y));
        if let Some(&prev) = seed.get(&a) {
            if prev != b {
                return Ok((None, true));
            }
        }
        seed.insert(a, b);
    }
    // The seed must itself be injective, else no injective cocone exists.
    let values: BTreeSet<Elem> = seed.values().copied().collect();
    if values.len() != seed.len() {
        return Ok((None, true));
    }
    let (found, complete) =
        enumerate_cocones(d1.codomain(), d2.codomain(), &seed, class, max_size, true)
            .ok_or_else(|| EngineError::Unsupported(alloc::format!(
                "class `{}` does not support cocone search",
                class.name()
            )))?;
    Ok((found.into_iter().next(), complete))
}

/// Is there an isomorphism of codomains commuting with both amalgams' legs?
/// For any diagrams over one span this is isomorphism fixing the span.
pub fn iso_fixing_span(a: &AmalgamationDiagram, b: &AmalgamationDiagram) -> bool {
    if !a.same_span(b) || a.codomain().size() != b.codomain().size() {
        return false;
    }
    let mut forced: BTreeMap<Elem, Elem> = BTreeMap::new();
    let pairs = a
        .g1()
        .map()
        .iter()
        .map(|(k, v)| (*v, b.g1().apply(*k)))
        .chain(a.g2().map().iter().map(|(k, v)| (*v, b.g2().apply(*k))));
    for (from, to) in pairs {
        if *forced.entry(from).or_insert(to) != to {
            return false; // conflicting requirements: no commuting map at all
        }
    }
    crate::structures::canon::find_isomorphism_colored(
        a.codomain(),
        b.codomain(),
        &Coloring::new(),
        &Coloring::new(),
        &forced,
    )
    .is_some()
}

/// An isomorphism of spans: a compatible triple of isomorphisms between the
/// bases and the two leg targets. Returns the leg components `(a1, a2)`
/// (the base component is determined); `None` when the spans are not
/// isomorphic.
pub fn find_span_transport(from: &Span, to: &Span) -> Option<(Embedding, Embedding)> {
    if from.base().size() != to.base().size()
        || from.left().target().size() != to.left().target().size()
        || from.right().target().size() != to.right().target().size()
    {
        return None;
    }
    for a0 in crate::structures::map::enumerate_embeddings(from.base(), to.base()) {
        let forced1: BTreeMap<Elem, Elem> = from
            .base()
            .elements()
            .map(|x| (from.left().apply(x), to.left().apply(a0.apply(x))))
            .collect();
        let Some(a1) = crate::structures::map::find_embedding_extending(
            from.left().target(),
            to.left().target(),
            &forced1,
        ) else {
            continue;
        };
        let forced2: BTreeMap<Elem, Elem> = from
            .base()
            .elements()
            .map(|x| (from.right().apply(x), to.right().apply(a0.apply(x))))
            .collect();
        let Some(a2) = crate::structures::map::find_embedding_extending(
            from.right().target(),
            to.right().target(),
            &forced2,
        ) else {
            continue;
        };
        if a1.is_isomorphism() && a2.is_isomorphism() {
            return Some((a1, a2));
        }
    }
    None
}

/// A square of literal inclusions, for tests and witness construction. All
/// four structures must be induced substructures of `ambient` (element ids
/// shared).
pub fn inclusion_diagram(
    base: &Arc<FinStructure>,
    left: &Arc<FinStructure>,
    right: &Arc<FinStructure>,
    ambient: &Arc<FinStructure>,
) -> Result<AmalgamationDiagram, EngineError> {
    let f1 = Embedding::inclusion(base.clone(), left.clone())?;
    let f2 = Embedding::inclusion(base.clone(), right.clone())?;
    let g1 = Embedding::inclusion(left.clone(), ambient.clone())?;
    let g2 = Embedding::inclusion(right.clone(), ambient.clone())?;
    AmalgamationDiagram::new(Span::new(f1, f2)?, g1, g2)
}
