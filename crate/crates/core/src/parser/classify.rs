use std::collections::BTreeSet;

use serde::Serialize;

use super::ast::{Activity, INROOM};
use crate::predicates::PredicateKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KinematicClassification {
    pub kinematic_only: bool,
    /// Sorted, deduplicated.
    pub unsupported_predicates: Vec<String>,
}

/// The six kinematic predicate names the engine evaluates.
pub fn default_supported() -> BTreeSet<String> {
    PredicateKind::ALL.iter().map(|k| k.name().to_string()).collect()
}

/// Decides whether every predicate an activity uses is in `supported`.
/// `inroom` never counts against an activity; it is a binding directive.
pub fn classify_kinematic(activity: &Activity, supported: &BTreeSet<String>) -> KinematicClassification {
    let unsupported: BTreeSet<String> = activity
        .predicates()
        .into_iter()
        .filter(|p| *p != INROOM && !supported.contains(*p))
        .map(str::to_string)
        .collect();
    KinematicClassification {
        kinematic_only: unsupported.is_empty(),
        unsupported_predicates: unsupported.into_iter().collect(),
    }
}
