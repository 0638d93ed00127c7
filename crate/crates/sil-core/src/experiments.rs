//! Theorem-level verifications composed from the other modules: the
//! canonicity search over coherent choices of amalgams, differential
//! comparison of relations, the pullback consequence for independent
//! squares, and the full axiom-suite runner.

use crate::budget::SearchBudget;
use crate::catalog::classes::{ClassHandle, LambdaFn};
use crate::catalog::relations::RelationSpec;
use crate::colimits::is_pullback_square;
use crate::diagrams::{
    amalgams_equivalent, find_span_transport, iso_fixing_span, span_diagrams, spans_up_to,
    AmalgamationDiagram, EquivCtx, Span,
};
use crate::error::EngineError;
use crate::independence::{self, RelView, Side};
use crate::report::{BoundCertificate, CheckReport, Verdict, Witness};
use crate::structures::map::Embedding;
use alloc::string::String;
use alloc::vec::Vec;
use core::cell::RefCell;

/// A relation given extensionally at a bound: for every span representative,
/// the equivalence classes of its diagrams with exactly one class chosen.
/// Diagrams over in-bound spans with larger codomains are decided by
/// equivalence against the chosen class, never by guessing.
#[derive(Debug)]
pub struct ExtensionalRelation {
    pub class_name: String,
    pub max_size: usize,
    decide_budget: SearchBudget,
    entries: Vec<SpanEntry>,
    state: RefCell<DecideState>,
}

#[derive(Debug, Clone)]
struct SpanEntry {
    span: Span,
    classes: Vec<Vec<AmalgamationDiagram>>,
    chosen: usize,
}

#[derive(Debug, Default)]
struct DecideState {
    ctx: EquivCtx,
    memo: alloc::collections::BTreeMap<AmalgamationDiagram, Verdict>,
}

impl ExtensionalRelation {
    /// Three-valued membership of a diagram in the chosen family.
    pub fn verdict(&self, d: &AmalgamationDiagram, class: &ClassHandle) -> Verdict {
        let mut state = self.state.borrow_mut();
        if let Some(&v) = state.memo.get(d) {
            return v;
        }
        let v = self.verdict_uncached(d, class, &mut state.ctx);
        state.memo.insert(d.clone(), v);
        v
    }

    fn verdict_uncached(
        &self,
        d: &AmalgamationDiagram,
        class: &ClassHandle,
        ctx: &mut EquivCtx,
    ) -> Verdict {
        for entry in &self.entries {
            let Some((a1, a2)) = find_span_transport(d.span(), &entry.span) else {
                continue;
            };
            // Transport the diagram onto the representative span.
            let (Ok(inv1), Ok(inv2)) = (a1.inverse(), a2.inverse()) else {
                continue;
            };
            let (Ok(g1), Ok(g2)) = (inv1.then(d.g1()), inv2.then(d.g2())) else {
                continue;
            };
            let Ok(transported) = AmalgamationDiagram::new(entry.span.clone(), g1, g2) else {
                continue;
            };
            if transported.codomain().size() <= self.max_size {
                for (c, members) in entry.classes.iter().enumerate() {
                    if members.iter().any(|m| iso_fixing_span(m, &transported)) {
                        return if c == entry.chosen { Verdict::Holds } else { Verdict::Fails };
                    }
                }
                return Verdict::Inconclusive;
            }
            // Larger codomain: decide by equivalence with the chosen class.
            let budget = self.decide_budget.with_codomain(
                self.decide_budget
                    .max_codomain_size
                    .max(class.joint_size_bound(transported.codomain().size(), self.max_size)),
            );
            let mut any_inconclusive = false;
            for member in &entry.classes[entry.chosen] {
                match amalgams_equivalent(&transported, member, class, budget, ctx) {
                    Ok((Verdict::Holds, _)) => return Verdict::Holds,
                    Ok((Verdict::Fails, _)) => {}
                    Ok((Verdict::Inconclusive, _)) | Err(_) => any_inconclusive = true,
                }
            }
            return if any_inconclusive { Verdict::Inconclusive } else { Verdict::Fails };
        }
        Verdict::Inconclusive
    }

    /// Span representatives and chosen-class sizes, for reporting.
    pub fn summary(&self) -> Vec<(usize, usize, usize)> {
        self.entries
            .iter()
            .map(|e| (e.span.base().size(), e.classes.len(), e.chosen))
            .collect()
    }
}

/// Outcome of the coherent-choice enumeration.
#[derive(Debug)]
pub struct CanonicityOutcome {
    pub survivors: Vec<ExtensionalRelation>,
    pub spans_total: usize,
    pub spans_skipped: usize,
    pub choices_examined: u64,
    pub notes: Vec<String>,
}

/// Enumerate coherent choices of amalgams: per span one equivalence class
/// (existence and uniqueness hold by construction), then filter by both
/// transitivities, both monotonicities, and local character. Returns the
/// surviving extensional relations.
pub fn canonicity_search(
    class: &ClassHandle,
    max_size: usize,
    budget: SearchBudget,
    lc_lambda: LambdaFn,
    lc_alpha_max: usize,
) -> Result<CanonicityOutcome, EngineError> {
    let mut notes: Vec<String> = Vec::new();
    let mut ctx = EquivCtx::new();
    let spans = spans_up_to(class, max_size);
    let spans_total = spans.len();
    let mut skipped = 0usize;
    let config_budget = SearchBudget { max_codomain_size: max_size, max_depth: budget.max_depth };
    let mut entries: Vec<SpanEntry> = Vec::new();
    for span in spans {
        let diagrams = span_diagrams(&span, class, config_budget)?;
        if diagrams.is_empty() {
            skipped += 1;
            continue;
        }
        // Partition the diagrams into equivalence classes.
        let mut classes: Vec<Vec<AmalgamationDiagram>> = Vec::new();
        let mut inconclusive = false;
        'next: for d in diagrams {
            for members in classes.iter_mut() {
                match amalgams_equivalent(&d, &members[0], class, budget, &mut ctx)? {
                    (Verdict::Holds, _) => {
                        members.push(d);
                        continue 'next;
                    }
                    (Verdict::Fails, _) => {}
                    (Verdict::Inconclusive, _) => inconclusive = true,
                }
            }
            classes.push(alloc::vec![d]);
        }
        if inconclusive {
            notes.push(alloc::format!(
                "span over a base of size {} had inconclusive equivalences; its classes may be split too finely",
                span.base().size()
            ));
        }
        entries.push(SpanEntry { span, classes, chosen: 0 });
    }
    if skipped > 0 {
        notes.push(alloc::format!(
            "{skipped} spans have no amalgam within the bound and constrain no choice"
        ));
    }
    // Depth-first enumeration of choice functions. Spans whose class count
    // is 1 are forced; the product over the rest is the real search space.
    let mut survivors: Vec<ExtensionalRelation> = Vec::new();
    let mut choice: Vec<usize> = alloc::vec![0; entries.len()];
    let mut examined = 0u64;
    let free: Vec<usize> = (0..entries.len()).filter(|&i| entries[i].classes.len() > 1).collect();
    let space: u64 = free
        .iter()
        .map(|&i| entries[i].classes.len() as u64)
        .product();
    if space > 1_000_000 {
        return Err(EngineError::Unsupported(alloc::format!(
            "choice space of {space} functions exceeds the search cap"
        )));
    }
    enumerate_choices(
        class,
        max_size,
        budget,
        lc_lambda,
        lc_alpha_max,
        &entries,
        &free,
        0,
        &mut choice,
        &mut examined,
        &mut survivors,
    )?;
    Ok(CanonicityOutcome {
        survivors,
        spans_total,
        spans_skipped: skipped,
        choices_examined: examined,
        notes,
    })
}

#[allow(clippy::too_many_arguments)]
fn enumerate_choices(
    class: &ClassHandle,
    max_size: usize,
    budget: SearchBudget,
    lc_lambda: LambdaFn,
    lc_alpha_max: usize,
    entries: &[SpanEntry],
    free: &[usize],
    depth: usize,
    choice: &mut Vec<usize>,
    examined: &mut u64,
    survivors: &mut Vec<ExtensionalRelation>,
) -> Result<(), EngineError> {
    if depth == free.len() {
        *examined += 1;
        let table = ExtensionalRelation {
            class_name: class.name(),
            max_size,
            decide_budget: budget,
            entries: entries
                .iter()
                .zip(choice.iter())
                .map(|(e, &c)| SpanEntry { chosen: c, ..e.clone() })
                .collect(),
            state: RefCell::new(DecideState::default()),
        };
        if choice_survives(&table, class, max_size, budget, lc_lambda, lc_alpha_max)? {
            survivors.push(table);
        }
        return Ok(());
    }
    let idx = free[depth];
    for c in 0..entries[idx].classes.len() {
        choice[idx] = c;
        enumerate_choices(
            class, max_size, budget, lc_lambda, lc_alpha_max, entries, free, depth + 1, choice,
            examined, survivors,
        )?;
    }
    choice[idx] = 0;
    Ok(())
}

fn choice_survives(
    table: &ExtensionalRelation,
    class: &ClassHandle,
    max_size: usize,
    budget: SearchBudget,
    lc_lambda: LambdaFn,
    lc_alpha_max: usize,
) -> Result<bool, EngineError> {
    let view = RelView::table(table, class);
    for side in [Side::Right, Side::Left] {
        if independence::check_transitivity(view, max_size, budget, side)?.verdict
            != Verdict::Holds
        {
            return Ok(false);
        }
        if independence::check_monotonicity(view, max_size, budget, side)?.verdict
            != Verdict::Holds
        {
            return Ok(false);
        }
    }
    let lc = independence::check_local_character(view, lc_lambda, lc_alpha_max, max_size, budget)?;
    Ok(lc.verdict == Verdict::Holds)
}

/// Report every diagram within the bound where the two relations disagree;
/// `Holds` means extensional agreement at the bound.
pub fn differential_compare(
    a: RelView<'_>,
    b: RelView<'_>,
    class: &ClassHandle,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    let mut configs = 0u64;
    let mut inconclusive = false;
    let config_budget = SearchBudget { max_codomain_size: max_size, max_depth: budget.max_depth };
    for span in spans_up_to(class, max_size) {
        for d in span_diagrams(&span, class, config_budget)? {
            if crate::budget::abort_requested() {
                return Ok(CheckReport::inconclusive("aborted by resource cap", configs));
            }
            configs += 1;
            match (a.verdict(&d), b.verdict(&d)) {
                (Verdict::Holds, Verdict::Fails) | (Verdict::Fails, Verdict::Holds) => {
                    return Ok(CheckReport::fails(
                        alloc::vec![Witness::diagram("relations disagree on this square", d)],
                        configs,
                        Some(BoundCertificate::with_budget(max_size, budget)),
                    ));
                }
                (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => inconclusive = true,
                _ => {}
            }
        }
    }
    if inconclusive {
        Ok(CheckReport::inconclusive("some verdicts unavailable at this bound", configs))
    } else {
        Ok(CheckReport::holds(BoundCertificate::with_budget(max_size, budget), configs))
    }
}

/// Every independent square within the bound must be a pullback square. The
/// finite sweep stands in for bases that are model-homogeneous; the report
/// carries that caveat.
pub fn verify_pullback_consequence(
    view: RelView<'_>,
    class: &ClassHandle,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    let mut configs = 0u64;
    let mut inconclusive = false;
    let config_budget = SearchBudget { max_codomain_size: max_size, max_depth: budget.max_depth };
    let caveat = "finite bases stand in for model-homogeneous bases; verdicts are at the bound";
    for span in spans_up_to(class, max_size) {
        for d in span_diagrams(&span, class, config_budget)? {
            configs += 1;
            match view.verdict(&d) {
                Verdict::Holds => {
                    if !is_pullback_square(&d) {
                        return Ok(CheckReport::fails(
                            alloc::vec![Witness::diagram(
                                "independent square that is not a pullback",
                                d,
                            )],
                            configs,
                            Some(BoundCertificate::with_budget(max_size, budget)),
                        )
                        .with_note(caveat));
                    }
                }
                Verdict::Inconclusive => inconclusive = true,
                Verdict::Fails => {}
            }
        }
    }
    let report = if inconclusive {
        CheckReport::inconclusive("some verdicts unavailable at this bound", configs)
    } else {
        CheckReport::holds(BoundCertificate::with_budget(max_size, budget), configs)
    };
    Ok(report.with_note(caveat))
}

/// The verdict matrix of one relation on one class.
#[derive(Debug)]
pub struct SuiteReport {
    pub axioms: Vec<(String, CheckReport)>,
}

impl SuiteReport {
    pub fn verdict(&self) -> Verdict {
        self.axioms
            .iter()
            .fold(Verdict::Holds, |acc, (_, r)| acc.and(r.verdict))
    }

    pub fn get(&self, name: &str) -> Option<&CheckReport> {
        self.axioms.iter().find(|(n, _)| n == name).map(|(_, r)| r)
    }

    pub fn all_hold(&self, names: &[&str]) -> bool {
        names
            .iter()
            .all(|n| self.get(n).is_some_and(|r| r.verdict == Verdict::Holds))
    }
}

/// Names of the axioms the full suite runs, in report order.
pub const SUITE_AXIOMS: [&str; 10] = [
    "closure_under_equivalence",
    "existence",
    "uniqueness",
    "transitivity_right",
    "transitivity_left",
    "monotonicity_right",
    "monotonicity_left",
    "base_monotonicity",
    "symmetry",
    "local_character",
];

/// Run every axiom checker and assemble the verdict matrix. `witness_theta`
/// adds the witness-property check (both sides) when set.
#[allow(clippy::too_many_arguments)]
pub fn run_axiom_suite(
    spec: &RelationSpec,
    class: &ClassHandle,
    max_size: usize,
    budget: SearchBudget,
    witness_theta: Option<usize>,
    lambda: LambdaFn,
    alpha_max: usize,
    axioms: Option<&[String]>,
) -> Result<SuiteReport, EngineError> {
    let view = RelView::new(spec, class);
    let wanted = |name: &str| axioms.is_none_or(|list| list.iter().any(|a| a == name));
    let mut out: Vec<(String, CheckReport)> = Vec::new();
    let mut push = |name: &str, report: CheckReport| {
        out.push((name.into(), report));
    };
    if wanted("closure_under_equivalence") {
        push(
            "closure_under_equivalence",
            independence::check_closure_under_equiv(view, max_size, budget)?,
        );
    }
    if wanted("existence") {
        push("existence", independence::check_existence(view, max_size, budget)?);
    }
    if wanted("uniqueness") {
        push("uniqueness", independence::check_uniqueness(view, max_size, budget)?);
    }
    if wanted("transitivity_right") {
        push(
            "transitivity_right",
            independence::check_transitivity(view, max_size, budget, Side::Right)?,
        );
    }
    if wanted("transitivity_left") {
        push(
            "transitivity_left",
            independence::check_transitivity(view, max_size, budget, Side::Left)?,
        );
    }
    if wanted("monotonicity_right") {
        push(
            "monotonicity_right",
            independence::check_monotonicity(view, max_size, budget, Side::Right)?,
        );
    }
    if wanted("monotonicity_left") {
        push(
            "monotonicity_left",
            independence::check_monotonicity(view, max_size, budget, Side::Left)?,
        );
    }
    if wanted("base_monotonicity") {
        push(
            "base_monotonicity",
            independence::check_base_monotonicity(view, max_size, budget)?,
        );
    }
    if wanted("symmetry") {
        push("symmetry", independence::check_symmetry(view, max_size, budget)?);
    }
    if let Some(theta) = witness_theta {
        if wanted("witness") {
            let right = independence::check_witness(view, theta, max_size, budget)?;
            let left = independence::check_witness(view.dual(), theta, max_size, budget)?;
            let verdict = right.verdict.and(left.verdict);
            let mut combined = match verdict {
                Verdict::Holds => CheckReport::holds(
                    BoundCertificate::with_budget(max_size, budget),
                    right.stats.configurations + left.stats.configurations,
                ),
                Verdict::Fails => CheckReport::fails(
                    right
                        .witnesses
                        .into_iter()
                        .chain(left.witnesses)
                        .collect(),
                    right.stats.configurations + left.stats.configurations,
                    Some(BoundCertificate::with_budget(max_size, budget)),
                ),
                Verdict::Inconclusive => CheckReport::inconclusive(
                    "a witness-property sweep was inconclusive",
                    right.stats.configurations + left.stats.configurations,
                ),
            };
            combined = combined.with_note(alloc::format!("theta = {theta}, both sides"));
            push("witness", combined);
        }
    }
    if wanted("local_character") {
        push(
            "local_character",
            independence::check_local_character(view, lambda, alpha_max, max_size, budget)?,
        );
    }
    Ok(SuiteReport { axioms: out })
}

/// Identity-square and composition evidence for the category of independent
/// squares, re-exported here for the suite-level callers.
pub fn check_knf_category(
    spec: &RelationSpec,
    class: &ClassHandle,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    independence::check_knf_category(RelView::new(spec, class), max_size, budget)
}

/// Helper for callers that need a table-backed view with the same lifetime
/// discipline as the named ones.
pub fn table_view<'a>(
    table: &'a ExtensionalRelation,
    class: &'a ClassHandle,
) -> RelView<'a> {
    RelView::table(table, class)
}

/// Compare a survivor against a named relation, diagram for diagram.
pub fn survivor_matches(
    table: &ExtensionalRelation,
    spec: &RelationSpec,
    class: &ClassHandle,
    max_size: usize,
    budget: SearchBudget,
) -> Result<CheckReport, EngineError> {
    differential_compare(
        RelView::table(table, class),
        RelView::new(spec, class),
        class,
        max_size,
        budget,
    )
}

/// Recover the embedding pair of a span transport, for tests.
pub fn span_transport_for_tests(a: &Span, b: &Span) -> Option<(Embedding, Embedding)> {
    find_span_transport(a, b)
}
