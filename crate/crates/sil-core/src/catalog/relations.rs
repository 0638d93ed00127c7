//! The named independence relations: decision procedures over amalgamation
//! diagrams, with a direct closure-style nonforking decider where one is
//! sound.

use crate::catalog::classes::{graph_adjacent, ClassHandle, ClassKind};
use crate::colimits::is_effective_square;
use crate::diagrams::AmalgamationDiagram;
use crate::error::EngineError;
use crate::report::Verdict;
use crate::structures::vocab::Elem;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// Which named relation a spec denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationKind {
    /// Independent iff the leg images intersect exactly in the base image.
    Intersection,
    /// Intersection plus: no codomain edge joins the two sides away from the
    /// base. On degree-bounded graphs with bound 2 this is evaluated as the
    /// effective-square relation, which additionally accepts the
    /// identifications the degree bound forces; elsewhere the two agree.
    NoCrossEdges,
    /// Intersection plus: every possible cross edge is present.
    AllCrossEdges,
    /// Regime switch on the base: bases of size < 2 demand no cross edges,
    /// larger bases demand all of them. Breaks transitivity.
    MixedBad,
    /// Regime switch on the isomorphism type of the right leg's source:
    /// even-sized sources demand all cross edges, odd-sized ones none.
    /// Breaks monotonicity.
    IsoSwitch,
    /// Independent iff the square is a pullback square.
    PullbackRel,
    /// Independent iff the square is an effective pullback square (the map
    /// from the pushout into the codomain is a regular mono).
    EffectivePullbackRel,
    /// Every square is independent.
    AllSquares,
}

impl RelationKind {
    pub fn name(self) -> &'static str {
        match self {
            RelationKind::Intersection => "intersection",
            RelationKind::NoCrossEdges => "no_cross_edges",
            RelationKind::AllCrossEdges => "all_cross_edges",
            RelationKind::MixedBad => "mixed_bad",
            RelationKind::IsoSwitch => "iso_switch",
            RelationKind::PullbackRel => "pullback_rel",
            RelationKind::EffectivePullbackRel => "effective_pullback_rel",
            RelationKind::AllSquares => "all_squares",
        }
    }
}

/// A named decision procedure over amalgamation diagrams of a fixed class.
#[derive(Debug, Clone)]
pub struct RelationSpec {
    kind: RelationKind,
    class_name: String,
    /// Evaluate no-cross via the degree-forced pushout (kappa = 2 classes).
    degree_aware: bool,
}

/// Pair a relation with a class, validating compatibility.
pub fn make_relation(kind: RelationKind, class: &ClassHandle) -> Result<RelationSpec, EngineError> {
    let incompatible = || EngineError::IncompatiblePairing {
        relation: kind.name().to_string(),
        class: class.name(),
    };
    let graph_like = matches!(class.kind(), ClassKind::Graph | ClassKind::KLocalGraph { .. });
    match kind {
        RelationKind::Intersection | RelationKind::PullbackRel | RelationKind::AllSquares => {}
        RelationKind::NoCrossEdges
        | RelationKind::AllCrossEdges
        | RelationKind::MixedBad
        | RelationKind::IsoSwitch => {
            if !graph_like {
                return Err(incompatible());
            }
        }
        RelationKind::EffectivePullbackRel => {
            if !class.has_pushouts() {
                return Err(incompatible());
            }
        }
    }
    let degree_aware = matches!(
        (kind, class.kind()),
        (RelationKind::NoCrossEdges, ClassKind::KLocalGraph { kappa: 2 })
    );
    Ok(RelationSpec { kind, class_name: class.name(), degree_aware })
}

/// Parse a relation name.
pub fn relation_from_name(name: &str, class: &ClassHandle) -> Result<RelationSpec, EngineError> {
    let kind = match name {
        "intersection" => RelationKind::Intersection,
        "no_cross_edges" => RelationKind::NoCrossEdges,
        "all_cross_edges" => RelationKind::AllCrossEdges,
        "mixed_bad" => RelationKind::MixedBad,
        "iso_switch" => RelationKind::IsoSwitch,
        "pullback_rel" => RelationKind::PullbackRel,
        "effective_pullback_rel" => RelationKind::EffectivePullbackRel,
        "all_squares" => RelationKind::AllSquares,
        other => return Err(EngineError::UnknownName(other.to_string())),
    };
    make_relation(kind, class)
}

/// The unordered cross pairs of a diagram: one element strictly on the left
/// side, the other strictly on the right.
fn cross_pairs(d: &AmalgamationDiagram) -> Vec<(Elem, Elem)> {
    let base = d.base_image();
    let left: BTreeSet<Elem> = d.left_image().difference(&base).copied().collect();
    let right: BTreeSet<Elem> = d.right_image().difference(&base).copied().collect();
    let mut out = Vec::new();
    for &x in &left {
        for &y in &right {
            if x != y {
                out.push((x, y));
            }
        }
    }
    out
}

fn images_meet_in_base(d: &AmalgamationDiagram) -> bool {
    let common: BTreeSet<Elem> = d
        .left_image()
        .intersection(&d.right_image())
        .copied()
        .collect();
    common == d.base_image()
}

fn no_cross_literal(d: &AmalgamationDiagram) -> bool {
    images_meet_in_base(d)
        && cross_pairs(d)
            .iter()
            .all(|&(x, y)| !graph_adjacent(d.codomain(), x, y))
}

fn all_cross_literal(d: &AmalgamationDiagram) -> bool {
    images_meet_in_base(d)
        && cross_pairs(d)
            .iter()
            .all(|&(x, y)| graph_adjacent(d.codomain(), x, y))
}

impl RelationSpec {
    pub fn kind(&self) -> RelationKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn class_name(&self) -> &str {
        &self.class_name
    }

    /// Decide independence of a diagram. Total for every valid pairing.
    pub fn decide(&self, d: &AmalgamationDiagram, class: &ClassHandle) -> bool {
        match self.kind {
            RelationKind::Intersection => images_meet_in_base(d),
            RelationKind::NoCrossEdges => {
                if self.degree_aware {
                    is_effective_square(d, class).map_or(false, |v| v.holds())
                } else {
                    no_cross_literal(d)
                }
            }
            RelationKind::AllCrossEdges => all_cross_literal(d),
            RelationKind::MixedBad => {
                if d.base().size() < 2 {
                    no_cross_literal(d)
                } else {
                    all_cross_literal(d)
                }
            }
            RelationKind::IsoSwitch => {
                if d.right().size() % 2 == 0 {
                    all_cross_literal(d)
                } else {
                    no_cross_literal(d)
                }
            }
            RelationKind::PullbackRel => crate::colimits::is_pullback_square(d),
            RelationKind::EffectivePullbackRel => {
                is_effective_square(d, class).map_or(false, |v| v.holds())
            }
            RelationKind::AllSquares => true,
        }
    }

    /// Is the direct (search-free) closure-style nonforking decider sound
    /// for this relation? True exactly when the decider restricted to the
    /// generated sides decides the existential: the relation must be
    /// anti-monotone in both sides and depend only on the induced part of
    /// the ambient structure. `IsoSwitch` is neither.
    pub fn has_direct_nonfork(&self) -> bool {
        !matches!(self.kind, RelationKind::IsoSwitch)
    }

    /// Three-valued view of `decide`, for callers that mix in extensional
    /// relations.
    pub fn verdict(&self, d: &AmalgamationDiagram, class: &ClassHandle) -> Verdict {
        if self.decide(d, class) {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }
}
