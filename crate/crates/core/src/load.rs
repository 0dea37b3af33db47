//! Reading domains and problems from text, accepting either PDDL or the
//! rendered canonical form for domains.

use thiserror::Error;

use crate::canon::{self, CanonError, CanonicalDomain, CanonicalProblem};
use crate::oracle::GroundError;
use crate::pddl::{self, ParseError, RawDomain};
use crate::FORMAT_HEADER;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Canon(#[from] CanonError),
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error("problems need a PDDL domain, not a canonical one")]
    CanonicalDomainForProblem,
}

#[derive(Debug, Clone)]
pub struct LoadedDomain {
    /// Absent when the input was already canonical.
    pub raw: Option<RawDomain>,
    pub domain: CanonicalDomain,
}

fn is_canonical(text: &str) -> bool {
    text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with(';')).is_some_and(|l| l.starts_with("(canonical-domain"))
}

/// Drops a leading format header line, if any.
fn strip_header(text: &str) -> &str {
    match text.trim_start().strip_prefix(FORMAT_HEADER) {
        Some(rest) if rest.starts_with(['\n', '\r']) || rest.is_empty() => rest,
        _ => text,
    }
}

pub fn load_domain(text: &str) -> Result<LoadedDomain, LoadError> {
    let text = strip_header(text);
    if is_canonical(text) {
        return Ok(LoadedDomain { raw: None, domain: canon::parse_canonical(text)? });
    }
    let raw = pddl::parse_domain(text)?;
    let domain = canon::canonicalize(&raw)?;
    Ok(LoadedDomain { raw: Some(raw), domain })
}

pub fn load_problem(d: &LoadedDomain, text: &str) -> Result<CanonicalProblem, LoadError> {
    let raw = d.raw.as_ref().ok_or(LoadError::CanonicalDomainForProblem)?;
    let p = pddl::parse_problem(text)?;
    Ok(canon::canonicalize_problem(raw, &d.domain, &p)?)
}
