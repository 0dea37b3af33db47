//! Lifted safety analysis of schemas against a template.

mod auxiliary;
mod classes;
mod decide;
mod pairs;

pub use auxiliary::{aux_executable, aux_reachable, aux_unreachable, make_aux, simply_safe_type, AuxSchema, SafeType};
pub use classes::{
    classify_pure, covers, matches_component, must_overlap, strongly_safe, subset, subsumes, t_classes, weight, Classification,
    RelevantKind, TClass,
};
pub use decide::{check_invariance, Analysis, Failure, Proof, Verdict};
pub use pairs::{class_matching, m_mutex, may_equal, pair_unreachable, unifiable, weight_lower, Matching, PairKind, Reduced};
