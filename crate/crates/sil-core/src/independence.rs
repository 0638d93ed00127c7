//! Checkers for the axioms of independence relations: existence, uniqueness,
//! transitivity, monotonicity (including descent), base monotonicity,
//! symmetry, closure under equivalence, the identity-square law, the
//! closure-style nonforking relation on sets, and the witness and
//! local-character properties.
//!
//! Every checker sweeps configurations built from class members of size at
//! most `max_size` (one representative per isomorphism class) and uses the
//! supplied [`SearchBudget`] for its inner existential searches. Verdicts
//! follow the engine-wide convention: `Fails` carries a witness found by an
//! exhaustive sweep, `Inconclusive` means some inner search ran out of
//! budget, and `Holds` certifies the swept bound, nothing beyond it.

use crate::budget::SearchBudget;
use crate::catalog::classes::{ClassHandle, LambdaFn};
use crate::catalog::relations::RelationSpec;
use crate::diagrams::{
    amalgams_equivalent, enumerate_amalgams_full, span_diagrams, spans_up_to, AmalgamationDiagram,
    EquivCtx, Span,
};
use crate::error::EngineError;
use crate::galois::{gtp_equal, pointed_extensions, types_equal_over_subset, PointedExtension};
use crate::report::{BoundCertificate, CheckReport, Verdict, Witness};
use crate::structures::map::{enumerate_embeddings, Embedding};
use crate::structures::structure::{subsets_of, tuples_over, FinStructure};
use crate::structures::vocab::Elem;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

/// Which side of the relation a directional axiom constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// The decision procedure a view runs: a named relation from the catalog or
/// an extensional relation table produced by the canonicity search.
#[derive(Clone, Copy)]
pub enum RelSource<'a> {
    Named(&'a RelationSpec),
    Table(&'a crate::experiments::ExtensionalRelation),
}

/// A relation together with an optional dualization: the left-hand version
/// of every axiom is the right-hand version of the dual relation, so the
/// checkers only implement the right-hand sweeps. Named relations decide
/// every diagram; tables may be inconclusive outside their bound, and the
/// sweeps then record the gap instead of guessing.
#[derive(Clone, Copy)]
pub struct RelView<'a> {
    pub source: RelSource<'a>,
    pub class: &'a ClassHandle,
    dualized: bool,
}

impl<'a> RelView<'a> {
    pub fn new(spec: &'a RelationSpec, class: &'a ClassHandle) -> Self {
        RelView { source: RelSource::Named(spec), class, dualized: false }
    }

    pub fn table(rel: &'a crate::experiments::ExtensionalRelation, class: &'a ClassHandle) -> Self {
        RelView { source: RelSource::Table(rel), class, dualized: false }
    }

    pub fn dual(self) -> Self {
        RelView { dualized: !self.dualized, ..self }
    }

    fn oriented(self, side: Side) -> Self {
        match side {
            Side::Right => self,
            Side::Left => self.dual(),
        }
    }

    /// Three-valued decision; inconclusive only for table views outside
    /// their bound.
    pub fn verdict(&self, d: &AmalgamationDiagram) -> Verdict {
        let oriented;
        let d = if self.dualized {
            oriented = d.dual();
            &oriented
        } else {
            d
        };
        match self.source {
            RelSource::Named(spec) => spec.verdict(d, self.class),
            RelSource::Table(rel) => rel.verdict(d, self.class),
        }
    }

    /// Convenience for contexts that treat unknown as not-independent; the
    /// sweeps that must distinguish the cases use [`RelView::verdict`].
    pub fn decide(&self, d: &AmalgamationDiagram) -> bool {
        self.verdict(d) == Verdict::Holds
    }

    fn direct_tight_nonfork(&self) -> bool {
        matches!(self.source, RelSource::Named(spec) if spec.has_direct_nonfork())
    }

    fn spec_decide(&self, d: &AmalgamationDiagram) -> Verdict {
        match self.source {
            RelSource::Named(spec) => spec.verdict(d, self.class),
            RelSource::Table(rel) => rel.verdict(d, self.class),
        }
    }
}

/// Default inner-search budget for a sweep at `max_size`: enough codomain
/// room to glue two bound-sized structures, chain depth 2.
pub fn default_budget(class: &ClassHandle, max_size: usize) -> SearchBudget {
    SearchBudget {
        max_codomain_size: class.joint_size_bound(max_size, max_size),
        max_depth: 2,
    }
}

struct Sweep {
    configs: u64,
    inconclusive: Vec<String>,
}

impl Sweep {
    fn new() -> Self {
        Sweep { configs: 0, inconclusive: Vec::new() }
    }

    fn tick(&mut self) -> bool {
        self.configs += 1;
        crate::budget::abort_requested()
    }

    fn finish(self, max_size: usize, budget: SearchBudget) -> CheckReport {
        if self.inconclusive.is_empty() {
            CheckReport::holds(BoundCertificate::with_budget(max_size, budget), self.configs)
        } else {
            let mut report = CheckReport::inconclusive(
                self.inconclusive.first().cloned().unwrap_or_default(),
                self.configs,
            );
            for note in self.inconclusive.into_iter().skip(1).take(3) {
                report = report.with_note(note);
            }
            report
        }
    }

    fn aborted(self) -> CheckReport {
        CheckReport::inconclusive("aborted by resource cap", self.configs)
    }
}

fn config_budget(max_size: usize, budget: SearchBudget) -> SearchBudget {
    SearchBudget { max_codomain_size: max_size, max_depth: budget.max_depth }
}

/// Diagrams over the span with codomain within `max_size`, oriented for the
/// view (the sweep space is self-dual, so orientation only relabels).
fn view_diagrams(
    view: &RelView<'_>,
    span: &Span,
    max_size: usize,
    budget: SearchBudget,
) -> Result<Vec<AmalgamationDiagram>, EngineError> {
    span_diagrams(span, view.class, config_budget(max_size, budget))
}

/// Closure under equivalence, plus the isomorphism-invariance probe: an
/// independent diagram must stay independent across equivalence and across
/// relabeling of the whole square.
pub fn check_closure_under_equiv(
    view: RelView<'_>,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    let mut sweep = Sweep::new();
    let mut ctx = EquivCtx::new();
    for span in spans_up_to(view.class, max_size) {
        let diagrams = view_diagrams(&view, &span, max_size, budget)?;
        for d in &diagrams {
            if sweep.tick() {
                return Ok(sweep.aborted());
            }
            // Invariance probe: relabel every structure of the square.
            let relabeled = relabel_diagram(d);
            match (view.verdict(d), view.verdict(&relabeled)) {
                (Verdict::Holds, Verdict::Fails) | (Verdict::Fails, Verdict::Holds) => {
                    return Ok(CheckReport::fails(
                        alloc::vec![Witness::diagram(
                            "relation is not isomorphism-invariant",
                            d.clone()
                        )],
                        sweep.configs,
                        Some(BoundCertificate::with_budget(max_size, budget)),
                    ));
                }
                (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => {
                    sweep.inconclusive.push("relation verdict unavailable at this bound".into());
                }
                _ => {}
            }
        }
        for d in diagrams.iter().filter(|d| view.verdict(d) == Verdict::Holds) {
            for e in diagrams.iter().filter(|e| view.verdict(e) == Verdict::Fails) {
                if sweep.tick() {
                    return Ok(sweep.aborted());
                }
                match amalgams_equivalent(d, e, view.class, budget, &mut ctx)? {
                    (Verdict::Holds, _) => {
                        return Ok(CheckReport::fails(
                            alloc::vec![Witness::diagram_pair(
                                "equivalent diagrams with different verdicts",
                                d.clone(),
                                e.clone(),
                            )],
                            sweep.configs,
                            Some(BoundCertificate::with_budget(max_size, budget)),
                        ));
                    }
                    (Verdict::Fails, _) => {}
                    (Verdict::Inconclusive, _) => sweep
                        .inconclusive
                        .push("equivalence search exhausted its budget".into()),
                }
            }
        }
    }
    Ok(sweep.finish(max_size, budget))
}

fn relabel_diagram(d: &AmalgamationDiagram) -> AmalgamationDiagram {
    let shift = |m: &Arc<FinStructure>| -> Arc<FinStructure> {
        Arc::new(m.relabeled(&m.elements().map(|e| (e, e + 101)).collect()))
    };
    let base = shift(d.base());
    let left = shift(d.left());
    let right = shift(d.right());
    let cod = shift(d.codomain());
    let remap = |emb: &Embedding, src: &Arc<FinStructure>, tgt: &Arc<FinStructure>| {
        Embedding::from_parts(
            src.clone(),
            tgt.clone(),
            emb.map().iter().map(|(k, v)| (k + 101, v + 101)).collect(),
        )
        .expect("relabeling preserves embeddings")
    };
    let span = Span::new(
        remap(d.span().left(), &base, &left),
        remap(d.span().right(), &base, &right),
    )
    .expect("relabeling preserves spans");
    AmalgamationDiagram::new(span, remap(d.g1(), &left, &cod), remap(d.g2(), &right, &cod))
        .expect("relabeling preserves squares")
}

/// Every span within the bound has an independent amalgam within the joint
/// headroom of the budget.
pub fn check_existence(
    view: RelView<'_>,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    let mut sweep = Sweep::new();
    for span in spans_up_to(view.class, max_size) {
        if sweep.tick() {
            return Ok(sweep.aborted());
        }
        let (tights, complete) = enumerate_amalgams_full(&span, view.class, budget)?;
        let mut found = tights.iter().any(|d| view.verdict(d) == Verdict::Holds);
        if !found {
            // An independent amalgam may need a non-tight codomain.
            'outer: for tight in &tights {
                for ext in view.class.extensions(tight.codomain(), budget.max_codomain_size) {
                    let d = AmalgamationDiagram::new(
                        span.clone(),
                        tight.g1().then(&ext)?,
                        tight.g2().then(&ext)?,
                    )?;
                    if view.verdict(&d) == Verdict::Holds {
                        found = true;
                        break 'outer;
                    }
                }
            }
        }
        if !found {
            if !complete {
                sweep.inconclusive.push("amalgam enumeration was not exhaustive".into());
                continue;
            }
            return Ok(CheckReport::fails(
                alloc::vec![Witness::structures(
                    "span without an independent amalgam",
                    alloc::vec![
                        ("base".into(), (**span.base()).clone()),
                        ("left".into(), (**span.left().target()).clone()),
                        ("right".into(), (**span.right().target()).clone()),
                    ],
                )],
                sweep.configs,
                Some(BoundCertificate::with_budget(max_size, budget)),
            ));
        }
    }
    Ok(sweep.finish(max_size, budget))
}

/// Any two independent amalgams of one span are equivalent.
pub fn check_uniqueness(
    view: RelView<'_>,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    let mut sweep = Sweep::new();
    let mut ctx = EquivCtx::new();
    for span in spans_up_to(view.class, max_size) {
        let independents: Vec<AmalgamationDiagram> = view_diagrams(&view, &span, max_size, budget)?
            .into_iter()
            .filter(|d| view.verdict(d) == Verdict::Holds)
            .collect();
        for (i, d) in independents.iter().enumerate() {
            for e in independents.iter().skip(i + 1) {
                if sweep.tick() {
                    return Ok(sweep.aborted());
                }
                match amalgams_equivalent(d, e, view.class, budget, &mut ctx)? {
                    (Verdict::Holds, _) => {}
                    (Verdict::Fails, _) => {
                        return Ok(CheckReport::fails(
                            alloc::vec![Witness::diagram_pair(
                                "inequivalent independent amalgams of one span",
                                d.clone(),
                                e.clone(),
                            )],
                            sweep.configs,
                            Some(BoundCertificate::with_budget(max_size, budget)),
                        ));
                    }
                    (Verdict::Inconclusive, _) => sweep
                        .inconclusive
                        .push("equivalence search exhausted its budget".into()),
                }
            }
        }
    }
    Ok(sweep.finish(max_size, budget))
}

/// Composable independent squares compose (horizontally for the right
/// version, vertically for the left one).
pub fn check_transitivity(
    view: RelView<'_>,
    max_size: usize,
    budget: SearchBudget,
    side: Side,
) -> Result<CheckReport, EngineError> {
    let view = view.oriented(side);
    let mut sweep = Sweep::new();
    let members = view.class.members_up_to(max_size);
    for span1 in spans_up_to(view.class, max_size) {
        let firsts: Vec<AmalgamationDiagram> = view_diagrams(&view, &span1, max_size, budget)?
            .into_iter()
            .filter(|d| view.verdict(d) == Verdict::Holds)
            .collect();
        for d1 in &firsts {
            // Second squares sit on the span (d1.g2, f24) out of the right
            // source.
            for m4 in &members {
                for f24 in enumerate_embeddings(d1.right(), m4) {
                    let span2 = Span::new(d1.g2().clone(), f24.clone())?;
                    for d2 in view_diagrams(&view, &span2, max_size, budget)? {
                        if sweep.tick() {
                            return Ok(sweep.aborted());
                        }
                        if view.verdict(&d2) != Verdict::Holds {
                            continue;
                        }
                        let composite = AmalgamationDiagram::new(
                            Span::new(span1.left().clone(), span1.right().then(&f24)?)?,
                            d1.g1().then(d2.g1())?,
                            d2.g2().clone(),
                        )?;
                        let cv = view.verdict(&composite);
                        if cv == Verdict::Inconclusive {
                            sweep.inconclusive.push("composite verdict unavailable".into());
                            continue;
                        }
                        if cv == Verdict::Fails {
                            return Ok(CheckReport::fails(
                                alloc::vec![
                                    Witness::diagram_pair(
                                        "independent squares whose composite is dependent",
                                        d1.clone(),
                                        d2.clone(),
                                    ),
                                    Witness::diagram("the composite square", composite),
                                ],
                                sweep.configs,
                                Some(BoundCertificate::with_budget(max_size, budget)),
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(sweep.finish(max_size, budget))
}

/// Monotonicity (shrinking the off-base side preserves independence) plus
/// the descent form: an independent outer rectangle has an independent left
/// square.
pub fn check_monotonicity(
    view: RelView<'_>,
    max_size: usize,
    budget: SearchBudget,
    side: Side,
) -> Result<CheckReport, EngineError> {
    let view = view.oriented(side);
    let mut sweep = Sweep::new();
    let members = view.class.members_up_to(max_size);
    // Part 1: the implication from the composite-side square.
    for span in spans_up_to(view.class, max_size) {
        // span = (f01: M0 -> M1, f03: M0 -> M3); factor f03 through M2.
        let f01 = span.left();
        let f03 = span.right();
        let diagrams: Vec<AmalgamationDiagram> = view_diagrams(&view, &span, max_size, budget)?
            .into_iter()
            .filter(|d| view.verdict(d) == Verdict::Holds)
            .collect();
        if diagrams.is_empty() {
            continue;
        }
        for m2 in &members {
            for f02 in enumerate_embeddings(span.base(), m2) {
                for f23 in enumerate_embeddings(m2, f03.target()) {
                    if f02.then(&f23)?.map() != f03.map() {
                        continue;
                    }
                    for d in &diagrams {
                        if sweep.tick() {
                            return Ok(sweep.aborted());
                        }
                        let shrunk = AmalgamationDiagram::new(
                            Span::new(f01.clone(), f02.clone())?,
                            d.g1().clone(),
                            f23.then(d.g2())?,
                        )?;
                        let sv = view.verdict(&shrunk);
                        if sv == Verdict::Inconclusive {
                            sweep.inconclusive.push("shrunk verdict unavailable".into());
                            continue;
                        }
                        if sv == Verdict::Fails {
                            return Ok(CheckReport::fails(
                                alloc::vec![
                                    Witness::diagram("independent square", d.clone()),
                                    Witness::diagram("dependent shrinking", shrunk),
                                ],
                                sweep.configs,
                                Some(BoundCertificate::with_budget(max_size, budget)),
                            ));
                        }
                    }
                }
            }
        }
    }
    // Part 2: descent. Outer rectangle independent => left square
    // independent. The rectangle is any composable pair of squares.
    for span1 in spans_up_to(view.class, max_size) {
        for d1 in view_diagrams(&view, &span1, max_size, budget)? {
            for m4 in &members {
                for f24 in enumerate_embeddings(d1.right(), m4) {
                    let span2 = Span::new(d1.g2().clone(), f24.clone())?;
                    for d2 in view_diagrams(&view, &span2, max_size, budget)? {
                        if sweep.tick() {
                            return Ok(sweep.aborted());
                        }
                        let outer = AmalgamationDiagram::new(
                            Span::new(span1.left().clone(), span1.right().then(&f24)?)?,
                            d1.g1().then(d2.g1())?,
                            d2.g2().clone(),
                        )?;
                        let (ov, lv) = (view.verdict(&outer), view.verdict(&d1));
                        if ov == Verdict::Inconclusive || lv == Verdict::Inconclusive {
                            sweep.inconclusive.push("descent verdict unavailable".into());
                            continue;
                        }
                        if ov == Verdict::Holds && lv == Verdict::Fails {
                            return Ok(CheckReport::fails(
                                alloc::vec![
                                    Witness::diagram("independent outer rectangle", outer),
                                    Witness::diagram("dependent left square", d1.clone()),
                                ],
                                sweep.configs,
                                Some(BoundCertificate::with_budget(max_size, budget)),
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(sweep.finish(max_size, budget))
}

/// Base monotonicity: an independent square over a base persists, after a
/// compatible enlargement, over any intermediate base.
pub fn check_base_monotonicity(
    view: RelView<'_>,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    let mut sweep = Sweep::new();
    let members = view.class.members_up_to(max_size);
    for span in spans_up_to(view.class, max_size) {
        // span = (f01, f03); factor f03 = f23 . f02 through M2, then ask for
        // the enlargement making the square over M2 independent.
        let f03 = span.right();
        let diagrams: Vec<AmalgamationDiagram> = view_diagrams(&view, &span, max_size, budget)?
            .into_iter()
            .filter(|d| view.verdict(d) == Verdict::Holds)
            .collect();
        if diagrams.is_empty() {
            continue;
        }
        for m2 in &members {
            for f02 in enumerate_embeddings(span.base(), m2) {
                for f23 in enumerate_embeddings(m2, f03.target()) {
                    if f02.then(&f23)?.map() != f03.map() {
                        continue;
                    }
                    for d in &diagrams {
                        if sweep.tick() {
                            return Ok(sweep.aborted());
                        }
                        if !base_monotonicity_witness(&view, d, &f23, budget)? {
                            return Ok(CheckReport::inconclusive(
                                "no enlargement found within the budget",
                                sweep.configs,
                            )
                            .with_note(
                                "base-monotonicity existential exhausted; raise the budget",
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(sweep.finish(max_size, budget))
}

/// Search for the enlargement required by base monotonicity: extend the
/// codomain, pick an intermediate left object containing both images, and
/// check independence of the resulting square over the intermediate base.
fn base_monotonicity_witness(
    view: &RelView<'_>,
    d: &AmalgamationDiagram,
    f23: &Embedding,
    budget: SearchBudget,
) -> Result<bool, EngineError> {
    let m2 = f23.source();
    for ext in view.class.extensions(d.codomain(), budget.max_codomain_size) {
        let m4p = ext.target();
        // Required images inside the extended codomain.
        let left_img: BTreeSet<Elem> = d.left_image().iter().map(|&e| ext.apply(e)).collect();
        let mid_img: BTreeSet<Elem> = m2
            .elements()
            .map(|x| ext.apply(d.g2().apply(f23.apply(x))))
            .collect();
        let mut required = left_img.clone();
        required.extend(mid_img.iter().copied());
        for subset in view.class.strong_subsets(m4p) {
            if !required.is_subset(&subset) {
                continue;
            }
            let Some(m1p) = m4p.substructure_on(&subset) else { continue };
            if !view.class.contains(&m1p) {
                continue;
            }
            let m1p = Arc::new(m1p);
            let f21p = Embedding::from_parts(
                m2.clone(),
                m1p.clone(),
                m2.elements()
                    .map(|x| (x, ext.apply(d.g2().apply(f23.apply(x)))))
                    .collect(),
            )?;
            let include = Embedding::inclusion(m1p.clone(), m4p.clone())?;
            let g2p = d.g2().then(&ext)?;
            let square = AmalgamationDiagram::new(Span::new(f21p, f23.clone())?, include, g2p)?;
            if view.verdict(&square) == Verdict::Holds {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// The relation equals its dual, diagram by diagram.
pub fn check_symmetry(
    view: RelView<'_>,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    let mut sweep = Sweep::new();
    for span in spans_up_to(view.class, max_size) {
        for d in view_diagrams(&view, &span, max_size, budget)? {
            if sweep.tick() {
                return Ok(sweep.aborted());
            }
            match (view.verdict(&d), view.verdict(&d.dual())) {
                (Verdict::Holds, Verdict::Fails) | (Verdict::Fails, Verdict::Holds) => {
                    return Ok(CheckReport::fails(
                        alloc::vec![Witness::diagram("asymmetric verdict", d)],
                        sweep.configs,
                        Some(BoundCertificate::with_budget(max_size, budget)),
                    ));
                }
                (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => {
                    sweep.inconclusive.push("dual verdict unavailable".into());
                }
                _ => {}
            }
        }
    }
    Ok(sweep.finish(max_size, budget))
}

/// Every commuting square one of whose span legs is an isomorphism is
/// independent (a consequence of existence and closure under equivalence).
pub fn check_isomorphism_lemma(
    view: RelView<'_>,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    let mut sweep = Sweep::new();
    let members = view.class.members_up_to(max_size);
    for m0 in &members {
        let id = Embedding::identity(m0.clone());
        for m2 in &members {
            for f2 in enumerate_embeddings(m0, m2) {
                for (span, lbl) in [
                    (Span::new(id.clone(), f2.clone())?, "left leg is the identity"),
                    (Span::new(f2.clone(), id.clone())?, "right leg is the identity"),
                ] {
                    for d in view_diagrams(&view, &span, max_size, budget)? {
                        if sweep.tick() {
                            return Ok(sweep.aborted());
                        }
                        match view.verdict(&d) {
                            Verdict::Holds => {}
                            Verdict::Inconclusive => {
                                sweep.inconclusive.push("verdict unavailable".into())
                            }
                            Verdict::Fails => {
                                return Ok(CheckReport::fails(
                                    alloc::vec![Witness::diagram(lbl, d)],
                                    sweep.configs,
                                    Some(BoundCertificate::with_budget(max_size, budget)),
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(sweep.finish(max_size, budget))
}

/// The closure-style nonforking relation on sets: `nfbar(m0, a, b, n)` holds
/// when sides containing `a` and `b` over the base can be found, inside some
/// extension of `n` within the budget, forming an independent square.
///
/// `m0`, `a` and `b` are subsets of `n`'s universe and `m0` must carry a
/// strong substructure. For relations that are anti-monotone in both sides
/// and read only the induced configuration (all named relations except the
/// isomorphism-type switch), the generated tight sides decide the
/// existential directly; otherwise a bounded search runs.
pub fn nfbar(
    view: RelView<'_>,
    m0: &BTreeSet<Elem>,
    a: &BTreeSet<Elem>,
    b: &BTreeSet<Elem>,
    n: &Arc<FinStructure>,
    budget: SearchBudget,
) -> Result<Verdict, EngineError> {
    let (a, b) = if view.dualized { (b, a) } else { (a, b) };
    if !m0.iter().chain(a.iter()).chain(b.iter()).all(|e| n.universe().contains(e)) {
        return Err(EngineError::InvalidStructure(
            "nonforking query sets must lie in the ambient universe".into(),
        ));
    }
    let base = Arc::new(n.substructure_on(m0).ok_or_else(|| {
        EngineError::InvalidStructure("base subset is not function-closed".into())
    })?);
    if !view.class.contains(&base) {
        return Err(EngineError::InvalidStructure("base subset is not a member".into()));
    }
    if view.direct_tight_nonfork() {
        let mut seed_a = m0.clone();
        seed_a.extend(a.iter().copied());
        let mut seed_b = m0.clone();
        seed_b.extend(b.iter().copied());
        let (Some(m1), Some(m2)) = (
            view.class.tight_substructure(n, &seed_a),
            view.class.tight_substructure(n, &seed_b),
        ) else {
            return Ok(Verdict::Inconclusive);
        };
        let d = crate::diagrams::inclusion_diagram(&base, &Arc::new(m1), &Arc::new(m2), n)?;
        return Ok(view.spec_decide(&d));
    }
    // Bounded search: extensions of the ambient, then side substructures.
    let mut any_inconclusive = false;
    for ext in view.class.extensions(n, budget.max_codomain_size) {
        let np = ext.target();
        let m0p: BTreeSet<Elem> = m0.iter().map(|&e| ext.apply(e)).collect();
        let ap: BTreeSet<Elem> = a.iter().map(|&e| ext.apply(e)).collect();
        let bp: BTreeSet<Elem> = b.iter().map(|&e| ext.apply(e)).collect();
        let subsets = view.class.strong_subsets(np);
        for s1 in subsets.iter() {
            if !m0p.is_subset(s1) || !ap.is_subset(s1) {
                continue;
            }
            let Some(m1) = np.substructure_on(s1) else { continue };
            if !view.class.contains(&m1) {
                continue;
            }
            for s2 in subsets.iter() {
                if !m0p.is_subset(s2) || !bp.is_subset(s2) {
                    continue;
                }
                let Some(m2) = np.substructure_on(s2) else { continue };
                if !view.class.contains(&m2) {
                    continue;
                }
                let basep = Arc::new(np.substructure_on(&m0p).expect("image of closed set"));
                let d = crate::diagrams::inclusion_diagram(
                    &basep,
                    &Arc::new(m1.clone()),
                    &Arc::new(m2),
                    np,
                )?;
                match view.spec_decide(&d) {
                    Verdict::Holds => return Ok(Verdict::Holds),
                    Verdict::Inconclusive => any_inconclusive = true,
                    Verdict::Fails => {}
                }
            }
        }
    }
    Ok(if any_inconclusive { Verdict::Inconclusive } else { Verdict::Fails })
}

/// One law of the closure-style relation, checked over all set
/// configurations within the bound.
pub fn check_nfbar_laws_detailed(
    view: RelView<'_>,
    max_size: usize,
    budget: SearchBudget,
    alpha_max: usize,
) -> Result<Vec<(String, CheckReport)>, EngineError> {
    let mut out: Vec<(String, CheckReport)> = Vec::new();
    out.push(("preservation".into(), nfbar_preservation(view, max_size, budget)?));
    out.push(("monotonicity".into(), nfbar_monotonicity(view, max_size, budget)?));
    out.push(("normality".into(), nfbar_normality(view, max_size, budget)?));
    out.push(("base_monotonicity".into(), nfbar_base_monotonicity(view, max_size, budget)?));
    out.push(("extension".into(), nfbar_extension(view, max_size, budget, alpha_max)?));
    out.push(("symmetry".into(), nfbar_symmetry(view, max_size, budget)?));
    out.push(("uniqueness".into(), nfbar_uniqueness(view, max_size, budget, alpha_max)?));
    out.push(("transitivity".into(), nfbar_transitivity(view, max_size, budget)?));
    Ok(out)
}

/// Aggregate view of [`check_nfbar_laws_detailed`].
pub fn check_nfbar_laws(
    view: RelView<'_>,
    max_size: usize,
    budget: SearchBudget,
    alpha_max: usize,
) -> Result<CheckReport, EngineError> {
    let mut verdict = Verdict::Holds;
    let mut witnesses = Vec::new();
    let mut configs = 0;
    let mut notes = Vec::new();
    for (name, report) in check_nfbar_laws_detailed(view, max_size, budget, alpha_max)? {
        configs += report.stats.configurations;
        notes.push(alloc::format!("{name}: {:?}", report.verdict));
        verdict = verdict.and(report.verdict);
        witnesses.extend(report.witnesses);
    }
    let mut out = match verdict {
        Verdict::Holds => {
            CheckReport::holds(BoundCertificate::with_budget(max_size, budget), configs)
        }
        Verdict::Fails => {
            CheckReport::fails(witnesses, configs, Some(BoundCertificate::with_budget(max_size, budget)))
        }
        Verdict::Inconclusive => CheckReport::inconclusive("a law sweep was inconclusive", configs),
    };
    for n in notes {
        out = out.with_note(n);
    }
    Ok(out)
}

/// Iterate over (ambient, strong base subset, A, B) set configurations.
fn for_each_set_config(
    view: &RelView<'_>,
    max_size: usize,
    mut f: impl FnMut(&Arc<FinStructure>, &BTreeSet<Elem>, &BTreeSet<Elem>, &BTreeSet<Elem>) -> Result<bool, EngineError>,
) -> Result<bool, EngineError> {
    for n in view.class.members_up_to(max_size) {
        let elems: Vec<Elem> = n.elements().collect();
        let all_subsets = subsets_of(&elems);
        for m0 in view.class.strong_subsets(&n) {
            for a in &all_subsets {
                for b in &all_subsets {
                    if !f(&n, &m0, a, b)? {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

fn nfbar_preservation(
    view: RelView<'_>,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    let mut sweep = Sweep::new();
    let mut witness = None;
    let done = for_each_set_config(&view, max_size, |n, m0, a, b| {
        let before = nfbar(view, m0, a, b, n, budget)?;
        for ext in view.class.extensions(n, budget.max_codomain_size.min(n.size() + 1)) {
            if sweep.tick() {
                return Ok(false);
            }
            let m0i: BTreeSet<Elem> = m0.iter().map(|&e| ext.apply(e)).collect();
            let ai: BTreeSet<Elem> = a.iter().map(|&e| ext.apply(e)).collect();
            let bi: BTreeSet<Elem> = b.iter().map(|&e| ext.apply(e)).collect();
            let after = nfbar(view, &m0i, &ai, &bi, ext.target(), budget)?;
            match (before, after) {
                (Verdict::Holds, Verdict::Fails) | (Verdict::Fails, Verdict::Holds) => {
                    witness = Some(Witness::structures(
                        "nonforking not preserved along an embedding",
                        alloc::vec![
                            ("ambient".into(), (**n).clone()),
                            ("extension".into(), (**ext.target()).clone())
                        ],
                    ));
                    return Ok(false);
                }
                (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => {
                    sweep.inconclusive.push("nonforking query exhausted its budget".into());
                }
                _ => {}
            }
        }
        Ok(true)
    })?;
    finish_law(sweep, done, witness, max_size, budget)
}

fn finish_law(
    sweep: Sweep,
    done: bool,
    witness: Option<Witness>,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    if !done {
        if let Some(w) = witness {
            return Ok(CheckReport::fails(
                alloc::vec![w],
                sweep.configs,
                Some(BoundCertificate::with_budget(max_size, budget)),
            ));
        }
        return Ok(sweep.aborted());
    }
    Ok(sweep.finish(max_size, budget))
}

fn nfbar_monotonicity(
    view: RelView<'_>,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    let mut sweep = Sweep::new();
    let mut witness = None;
    let done = for_each_set_config(&view, max_size, |n, m0, a, b| {
        if nfbar(view, m0, a, b, n, budget)? != Verdict::Holds {
            return Ok(true);
        }
        let av: Vec<Elem> = a.iter().copied().collect();
        let bv: Vec<Elem> = b.iter().copied().collect();
        for a0 in subsets_of(&av) {
            for b0 in subsets_of(&bv) {
                if sweep.tick() {
                    return Ok(false);
                }
                if nfbar(view, m0, &a0, &b0, n, budget)? == Verdict::Fails {
                    witness = Some(Witness::structures(
                        "nonforking lost under shrinking the sides",
                        alloc::vec![("ambient".into(), (**n).clone())],
                    ));
                    return Ok(false);
                }
            }
        }
        Ok(true)
    })?;
    finish_law(sweep, done, witness, max_size, budget)
}

fn nfbar_normality(
    view: RelView<'_>,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    let mut sweep = Sweep::new();
    let mut witness = None;
    let done = for_each_set_config(&view, max_size, |n, m0, a, b| {
        if sweep.tick() {
            return Ok(false);
        }
        let plain = nfbar(view, m0, a, b, n, budget)?;
        let mut am = a.clone();
        am.extend(m0.iter().copied());
        let mut bm = b.clone();
        bm.extend(m0.iter().copied());
        let normal = nfbar(view, m0, &am, &bm, n, budget)?;
        match (plain, normal) {
            (Verdict::Holds, Verdict::Fails) | (Verdict::Fails, Verdict::Holds) => {
                witness = Some(Witness::structures(
                    "adjoining the base to the sides changed the verdict",
                    alloc::vec![("ambient".into(), (**n).clone())],
                ));
                Ok(false)
            }
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => {
                sweep.inconclusive.push("nonforking query exhausted its budget".into());
                Ok(true)
            }
            _ => Ok(true),
        }
    })?;
    finish_law(sweep, done, witness, max_size, budget)
}

fn nfbar_base_monotonicity(
    view: RelView<'_>,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    let mut sweep = Sweep::new();
    let mut witness = None;
    let done = for_each_set_config(&view, max_size, |n, m0, a, b| {
        if nfbar(view, m0, a, b, n, budget)? != Verdict::Holds {
            return Ok(true);
        }
        for m2 in view.class.strong_subsets(n) {
            if !m0.is_subset(&m2) || !m2.is_subset(b) {
                continue;
            }
            if sweep.tick() {
                return Ok(false);
            }
            if nfbar(view, &m2, a, b, n, budget)? == Verdict::Fails {
                witness = Some(Witness::structures(
                    "nonforking lost over an intermediate base inside the right side",
                    alloc::vec![("ambient".into(), (**n).clone())],
                ));
                return Ok(false);
            }
        }
        Ok(true)
    })?;
    finish_law(sweep, done, witness, max_size, budget)
}

fn nfbar_symmetry(
    view: RelView<'_>,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    let mut sweep = Sweep::new();
    let mut witness = None;
    let done = for_each_set_config(&view, max_size, |n, m0, a, b| {
        if sweep.tick() {
            return Ok(false);
        }
        let fwd = nfbar(view, m0, a, b, n, budget)?;
        let bwd = nfbar(view, m0, b, a, n, budget)?;
        match (fwd, bwd) {
            (Verdict::Holds, Verdict::Fails) | (Verdict::Fails, Verdict::Holds) => {
                witness = Some(Witness::structures(
                    "asymmetric nonforking verdict",
                    alloc::vec![("ambient".into(), (**n).clone())],
                ));
                Ok(false)
            }
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => {
                sweep.inconclusive.push("nonforking query exhausted its budget".into());
                Ok(true)
            }
            _ => Ok(true),
        }
    })?;
    finish_law(sweep, done, witness, max_size, budget)
}

fn nfbar_transitivity(
    view: RelView<'_>,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    let mut sweep = Sweep::new();
    let mut witness = None;
    let done = for_each_set_config(&view, max_size, |n, m0, a, b| {
        for m2 in view.class.strong_subsets(n) {
            if !m0.is_subset(&m2) {
                continue;
            }
            if sweep.tick() {
                return Ok(false);
            }
            let lower = nfbar(view, m0, a, &m2, n, budget)?;
            let upper = nfbar(view, &m2, a, b, n, budget)?;
            if lower == Verdict::Holds && upper == Verdict::Holds {
                if nfbar(view, m0, a, b, n, budget)? == Verdict::Fails {
                    witness = Some(Witness::structures(
                        "nonforking fails to compose across an intermediate base",
                        alloc::vec![("ambient".into(), (**n).clone())],
                    ));
                    return Ok(false);
                }
            }
        }
        Ok(true)
    })?;
    finish_law(sweep, done, witness, max_size, budget)
}

fn nfbar_extension(
    view: RelView<'_>,
    max_size: usize,
    budget: SearchBudget,
    alpha_max: usize,
) -> Result<CheckReport, EngineError> {
    let mut sweep = Sweep::new();
    let mut ctx = EquivCtx::new();
    for m in view.class.members_up_to(max_size) {
        for alpha in 0..=alpha_max {
            let realized = pointed_extensions(view.class, &m, alpha, max_size.max(m.size() + 1));
            for p in &realized {
                for next in view.class.extensions(&m, max_size) {
                    if sweep.tick() {
                        return Ok(sweep.aborted());
                    }
                    // Find a tuple over the larger base with the same type
                    // over m that does not fork over m.
                    let n = next.target();
                    let mut found = false;
                    let mut any_inconclusive = false;
                    'search: for cand_ext in
                        view.class.extensions(n, budget.max_codomain_size)
                    {
                        let np = cand_ext.target();
                        let comp = next.then(&cand_ext)?;
                        let domain: Vec<Elem> = np.elements().collect();
                        for tuple in tuples_over(&domain, alpha) {
                            let q = PointedExtension::new(comp.clone(), tuple.clone())?;
                            // Same type over m?
                            let q_over_m = PointedExtension::new(comp.clone(), tuple.clone())?;
                            match gtp_equal(p, &q_over_m, view.class, budget, &mut ctx) {
                                Ok(Verdict::Holds) => {}
                                Ok(Verdict::Fails) => continue,
                                Ok(Verdict::Inconclusive) | Err(_) => {
                                    any_inconclusive = true;
                                    continue;
                                }
                            }
                            // Not forking over m: sides tuple vs the new base.
                            let m0_img: BTreeSet<Elem> =
                                m.elements().map(|x| comp.apply(x)).collect();
                            let a_img: BTreeSet<Elem> = q.tuple().iter().copied().collect();
                            let b_img: BTreeSet<Elem> =
                                n.elements().map(|x| cand_ext.apply(x)).collect();
                            match nfbar(view, &m0_img, &a_img, &b_img, np, budget)? {
                                Verdict::Holds => {
                                    found = true;
                                    break 'search;
                                }
                                Verdict::Inconclusive => any_inconclusive = true,
                                Verdict::Fails => {}
                            }
                        }
                    }
                    if !found {
                        if any_inconclusive {
                            sweep
                                .inconclusive
                                .push("extension search exhausted its budget".into());
                            continue;
                        }
                        return Ok(CheckReport::fails(
                            alloc::vec![Witness::structures(
                                "type with no nonforking extension to the larger base",
                                alloc::vec![
                                    ("base".into(), (*m).clone()),
                                    ("larger_base".into(), (**n).clone()),
                                    ("realized_in".into(), (**p.ambient()).clone()),
                                ],
                            )],
                            sweep.configs,
                            Some(BoundCertificate::with_budget(max_size, budget)),
                        ));
                    }
                }
            }
        }
    }
    Ok(sweep.finish(max_size, budget))
}

fn nfbar_uniqueness(
    view: RelView<'_>,
    max_size: usize,
    budget: SearchBudget,
    alpha_max: usize,
) -> Result<CheckReport, EngineError> {
    let mut sweep = Sweep::new();
    let mut ctx = EquivCtx::new();
    for n in view.class.members_up_to(max_size) {
        let elems: Vec<Elem> = n.elements().collect();
        for m0 in view.class.strong_subsets(&n) {
            for b in subsets_of(&elems) {
                if !m0.is_subset(&b) {
                    continue;
                }
                for alpha in 1..=alpha_max {
                    let tuples = tuples_over(&elems, alpha);
                    for t1 in &tuples {
                        for t2 in &tuples {
                            if sweep.tick() {
                                return Ok(sweep.aborted());
                            }
                            let over_m0 = types_equal_over_subset(
                                view.class, &n, &m0, t1, t2, budget, &mut ctx,
                            )?;
                            if over_m0 != Verdict::Holds {
                                continue;
                            }
                            let nf1 = nfbar(
                                view,
                                &m0,
                                &t1.iter().copied().collect(),
                                &b,
                                &n,
                                budget,
                            )?;
                            let nf2 = nfbar(
                                view,
                                &m0,
                                &t2.iter().copied().collect(),
                                &b,
                                &n,
                                budget,
                            )?;
                            if nf1 != Verdict::Holds || nf2 != Verdict::Holds {
                                continue;
                            }
                            match types_equal_over_subset(
                                view.class, &n, &b, t1, t2, budget, &mut ctx,
                            )? {
                                Verdict::Holds => {}
                                Verdict::Fails => {
                                    return Ok(CheckReport::fails(
                                        alloc::vec![Witness::structures(
                                            "nonforking types agreeing on the base differ over the set",
                                            alloc::vec![("ambient".into(), (*n).clone())],
                                        )],
                                        sweep.configs,
                                        Some(BoundCertificate::with_budget(max_size, budget)),
                                    ));
                                }
                                Verdict::Inconclusive => sweep
                                    .inconclusive
                                    .push("type comparison exhausted its budget".into()),
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(sweep.finish(max_size, budget))
}

/// The witness property: every failure of independence is already witnessed
/// by a subset of the chosen side with fewer than `theta` elements.
pub fn check_witness(
    view: RelView<'_>,
    theta: usize,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    let mut sweep = Sweep::new();
    for span in spans_up_to(view.class, max_size) {
        for d in view_diagrams(&view, &span, max_size, budget)? {
            match view.verdict(&d) {
                Verdict::Holds => continue,
                Verdict::Inconclusive => {
                    sweep.inconclusive.push("verdict unavailable".into());
                    continue;
                }
                Verdict::Fails => {}
            }
            if sweep.tick() {
                return Ok(sweep.aborted());
            }
            let base_img = d.base_image();
            let left_set = d.left_image();
            let right_elems: Vec<Elem> = d.right_image().into_iter().collect();
            let mut witnessed = false;
            let mut any_inconclusive = false;
            for a in subsets_of(&right_elems) {
                if a.len() >= theta {
                    continue;
                }
                match nfbar(view, &base_img, &left_set, &a, d.codomain(), budget)? {
                    Verdict::Fails => {
                        witnessed = true;
                        break;
                    }
                    Verdict::Inconclusive => any_inconclusive = true,
                    Verdict::Holds => {}
                }
            }
            if !witnessed {
                if any_inconclusive {
                    sweep.inconclusive.push("witness search exhausted its budget".into());
                    continue;
                }
                return Ok(CheckReport::fails(
                    alloc::vec![Witness::diagram(
                        "dependent square with no small witnessing subset",
                        d,
                    )],
                    sweep.configs,
                    Some(BoundCertificate::with_budget(max_size, budget)),
                ));
            }
        }
    }
    Ok(sweep.finish(max_size, budget))
}

/// Local character: every realized type of length up to `alpha_max` over a
/// member does not fork over some strong substructure of size at most
/// `lambda(alpha)`.
pub fn check_local_character(
    view: RelView<'_>,
    lambda: LambdaFn,
    alpha_max: usize,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    let mut sweep = Sweep::new();
    for m in view.class.members_up_to(max_size) {
        for alpha in 0..=alpha_max {
            let cap = lambda.eval(alpha);
            let ambient_bound = budget.max_codomain_size.min(m.size() + alpha.max(1));
            for p in pointed_extensions(view.class, &m, alpha, ambient_bound) {
                if sweep.tick() {
                    return Ok(sweep.aborted());
                }
                let n = p.ambient();
                let m_img: BTreeSet<Elem> = m.elements().map(|x| p.embedding().apply(x)).collect();
                let tuple_set: BTreeSet<Elem> = p.tuple().iter().copied().collect();
                let mut found = false;
                let mut any_inconclusive = false;
                for m0 in view.class.strong_subsets(&Arc::new(
                    n.substructure_on(&m_img).expect("strong base image"),
                )) {
                    if m0.len() > cap {
                        continue;
                    }
                    match nfbar(view, &m0, &tuple_set, &m_img, n, budget)? {
                        Verdict::Holds => {
                            found = true;
                            break;
                        }
                        Verdict::Inconclusive => any_inconclusive = true,
                        Verdict::Fails => {}
                    }
                }
                if !found {
                    if any_inconclusive {
                        sweep.inconclusive.push("local-character search exhausted its budget".into());
                        continue;
                    }
                    return Ok(CheckReport::fails(
                        alloc::vec![Witness::structures(
                            "type forking over every small base",
                            alloc::vec![
                                ("base".into(), (*m).clone()),
                                ("ambient".into(), (**n).clone()),
                            ],
                        )],
                        sweep.configs,
                        Some(BoundCertificate::with_budget(max_size, budget)),
                    ));
                }
            }
        }
    }
    Ok(sweep.finish(max_size, budget))
}

/// Evidence that the independent squares form a category: identity squares
/// are independent and independent squares compose.
pub fn check_knf_category(
    view: RelView<'_>,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    let mut sweep = Sweep::new();
    let members = view.class.members_up_to(max_size);
    for m1 in &members {
        for m2 in &members {
            for f in enumerate_embeddings(m1, m2) {
                if sweep.tick() {
                    return Ok(sweep.aborted());
                }
                let square = AmalgamationDiagram::new(
                    Span::new(f.clone(), Embedding::identity(m1.clone()))?,
                    Embedding::identity(m2.clone()),
                    f.clone(),
                )?;
                match view.verdict(&square) {
                    Verdict::Holds => {}
                    Verdict::Inconclusive => {
                        sweep.inconclusive.push("identity-square verdict unavailable".into())
                    }
                    Verdict::Fails => {
                        return Ok(CheckReport::fails(
                            alloc::vec![Witness::diagram("identity square is dependent", square)],
                            sweep.configs,
                            Some(BoundCertificate::with_budget(max_size, budget)),
                        ));
                    }
                }
            }
        }
    }
    let composition = check_transitivity(view, max_size, budget, Side::Right)?;
    let configs = sweep.configs + composition.stats.configurations;
    Ok(match composition.verdict {
        Verdict::Holds => CheckReport::holds(BoundCertificate::with_budget(max_size, budget), configs),
        Verdict::Fails => CheckReport::fails(composition.witnesses, configs, composition.certificate),
        Verdict::Inconclusive => {
            CheckReport::inconclusive("composition sweep was inconclusive", configs)
        }
    })
}
