//! Ground-level semantics used as an independent check of the lifted
//! analysis: grounding, ground classification, happenings and exhaustive
//! bounded search.

mod ground;
mod search;

pub use ground::{classify_ground, ground_action, ground_action_with, AtomSet, GroundAction, GroundError, Origin};
pub use search::{
    explore, reachable_search, verify_template, Bounds, Closure, Event, GroundDurative, GroundProblem, Inapplicable, OracleVerdict,
    TimedState,
};
