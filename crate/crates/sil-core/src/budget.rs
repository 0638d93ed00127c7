//! Search budgets and the global soft-abort flag.

use crate::error::EngineError;
use core::sync::atomic::{AtomicBool, Ordering};

/// Bounds for the bounded searches behind equivalence of amalgams and the
/// closure-style nonforking queries.
///
/// `max_codomain_size` caps the universe of any structure materialized by a
/// search (amalgam codomains, equivalence witnesses, ambient extensions).
/// `max_depth` caps the length of equivalence chains: one step glues two
/// diagrams into a common extension, and in classes without amalgamation
/// the full equivalence is the transitive closure of that step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SearchBudget {
    pub max_codomain_size: usize,
    pub max_depth: usize,
}

impl SearchBudget {
    pub fn new(max_codomain_size: usize, max_depth: usize) -> Result<Self, EngineError> {
        if max_codomain_size == 0 || max_depth == 0 {
            return Err(EngineError::BadParameter(
                "search budget fields must be at least 1".into(),
            ));
        }
        Ok(SearchBudget { max_codomain_size, max_depth })
    }

    /// Default budget for comparing two amalgams with codomains of the given
    /// sizes: the joint size is enough to glue genuinely equivalent amalgams
    /// in the built-in classes.
    pub fn for_codomains(a: usize, b: usize) -> Self {
        SearchBudget { max_codomain_size: (a + b).max(1), max_depth: 2 }
    }

    pub fn with_codomain(self, max_codomain_size: usize) -> Self {
        SearchBudget { max_codomain_size: max_codomain_size.max(1), ..self }
    }
}

static ABORT: AtomicBool = AtomicBool::new(false);

/// Ask running searches to stop; they report `Inconclusive` on their next
/// poll. Set by the host when a soft resource cap (e.g. memory) is exceeded.
pub fn request_abort() {
    ABORT.store(true, Ordering::Relaxed);
}

pub fn clear_abort() {
    ABORT.store(false, Ordering::Relaxed);
}

pub fn abort_requested() -> bool {
    ABORT.load(Ordering::Relaxed)
}
