//! Three-valued verdicts and the report type every checker returns.

use crate::diagrams::AmalgamationDiagram;
use crate::structures::map::StructMap;
use crate::structures::structure::FinStructure;
use crate::structures::vocab::Elem;
use alloc::string::String;
use alloc::vec::Vec;

/// Outcome of a bounded check. `Fails` is only reported when an exhaustive
/// sweep at the stated bound found a genuine violation; a search that ran
/// out of budget reports `Inconclusive`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    /// Conjunction: any failure dominates, else any inconclusive, else holds.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fails, _) | (_, Fails) => Fails,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            (Holds, Holds) => Holds,
        }
    }

    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }
}

/// What a sweep actually covered; attached to every conclusive report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BoundCertificate {
    /// Largest structure size in the swept configurations.
    pub max_size: usize,
    /// Codomain cap used by the inner bounded searches, when any ran.
    pub max_codomain_size: Option<usize>,
    /// Equivalence-chain depth used by the inner searches, when any ran.
    pub max_depth: Option<usize>,
}

impl BoundCertificate {
    pub fn sizes(max_size: usize) -> Self {
        BoundCertificate { max_size, ..Default::default() }
    }

    pub fn with_budget(max_size: usize, budget: crate::budget::SearchBudget) -> Self {
        BoundCertificate {
            max_size,
            max_codomain_size: Some(budget.max_codomain_size),
            max_depth: Some(budget.max_depth),
        }
    }
}

/// A witnessing configuration attached to a failing (or found) verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Diagram {
        label: String,
        diagram: AmalgamationDiagram,
    },
    DiagramPair {
        label: String,
        first: AmalgamationDiagram,
        second: AmalgamationDiagram,
    },
    Map {
        label: String,
        map: StructMap,
    },
    Structures {
        label: String,
        parts: Vec<(String, FinStructure)>,
    },
    /// A structure with a distinguished sequence of tuples.
    TupleSequence {
        label: String,
        structure: FinStructure,
        tuples: Vec<Vec<Elem>>,
    },
    Text(String),
}

impl Witness {
    pub fn diagram(label: impl Into<String>, diagram: AmalgamationDiagram) -> Self {
        Witness::Diagram { label: label.into(), diagram }
    }

    pub fn diagram_pair(
        label: impl Into<String>,
        first: AmalgamationDiagram,
        second: AmalgamationDiagram,
    ) -> Self {
        Witness::DiagramPair { label: label.into(), first, second }
    }

    pub fn map(label: impl Into<String>, map: StructMap) -> Self {
        Witness::Map { label: label.into(), map }
    }

    pub fn structures(label: impl Into<String>, parts: Vec<(String, FinStructure)>) -> Self {
        Witness::Structures { label: label.into(), parts }
    }

    pub fn text(label: impl Into<String>) -> Self {
        Witness::Text(label.into())
    }

    pub fn label(&self) -> &str {
        match self {
            Witness::Diagram { label, .. }
            | Witness::DiagramPair { label, .. }
            | Witness::Map { label, .. }
            | Witness::Structures { label, .. }
            | Witness::TupleSequence { label, .. } => label,
            Witness::Text(label) => label,
        }
    }
}

/// Sweep counters; wall time is added by the host, not measured here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CheckStats {
    pub configurations: u64,
}

/// Verdict plus evidence. A failing report carries at least one witness; a
/// holding report carries the bound certificate of the sweep that proves it.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub stats: CheckStats,
    pub certificate: Option<BoundCertificate>,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn holds(certificate: BoundCertificate, configurations: u64) -> Self {
        CheckReport {
            verdict: Verdict::Holds,
            witnesses: Vec::new(),
            stats: CheckStats { configurations },
            certificate: Some(certificate),
            notes: Vec::new(),
        }
    }

    pub fn fails(
        witnesses: Vec<Witness>,
        configurations: u64,
        certificate: Option<BoundCertificate>,
    ) -> Self {
        debug_assert!(!witnesses.is_empty(), "a failing report needs a witness");
        CheckReport {
            verdict: Verdict::Fails,
            witnesses,
            stats: CheckStats { configurations },
            certificate,
            notes: Vec::new(),
        }
    }

    pub fn inconclusive(note: impl Into<String>, configurations: u64) -> Self {
        CheckReport {
            verdict: Verdict::Inconclusive,
            witnesses: Vec::new(),
            stats: CheckStats { configurations },
            certificate: None,
            notes: alloc::vec![note.into()],
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}
