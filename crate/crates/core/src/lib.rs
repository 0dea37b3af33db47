//! Lifted mutual-exclusion invariant synthesis for PDDL2.1 temporal domains.

pub mod canon;
pub mod lifted;
pub mod load;
pub mod oracle;
pub mod pddl;
pub mod statevar;
pub mod synth;
pub mod template;

/// First line of every document the command-line tool writes.
pub const FORMAT_HEADER: &str = "tempinv-format 1";
