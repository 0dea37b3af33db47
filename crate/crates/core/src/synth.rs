//! Guess, check and repair: initial single-component templates are checked
//! and rejected ones are extended by one component at a time.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::canon::{CanonicalDomain, FragmentKind, Literal, SchemaRef};
use crate::lifted::{self, check_invariance, classify_pure, t_classes, Classification, Failure, Proof, TClass, Verdict};
use crate::template::{Component, Template};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Full temporal analysis.
    Tis,
    /// Only irrelevant and balanced schemas count as safe.
    Sis,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Tis => "tis",
            Mode::Sis => "sis",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    /// Largest number of components a repaired template may have.
    pub repair_cap: usize,
    /// Try every counted position for added components, keeping the
    /// admissible ones.
    pub repair_exhaustive: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options { repair_cap: 4, repair_exhaustive: false }
    }
}

/// For each modifiable relation of arity `a`: the template without a
/// counted argument and one per counted position, `a + 1` in total.
pub fn initial_templates(d: &CanonicalDomain) -> Vec<Template> {
    let mut out = Vec::new();
    for (rel, a) in d.modifiable_relations() {
        out.push(Template::single(rel, a, a));
        for p in 0..a {
            out.push(Template::single(rel, a, p));
        }
    }
    out
}

/// Where a repair looks for new literals: a relevant unbounded schema
/// restricted to one class.
#[derive(Debug, Clone)]
pub struct RepairSite {
    pub schema: SchemaRef,
    pub class: TClass,
}

impl From<&Failure> for RepairSite {
    fn from(f: &Failure) -> Self {
        RepairSite { schema: f.schema, class: f.class.clone() }
    }
}

/// Positions of `l2` holding the block arguments of `l` (in block order),
/// for every injective choice.
fn block_positions(blocks: &[&crate::canon::Arg], l2: &Literal) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(blocks: &[&crate::canon::Arg], l2: &Literal, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let Some(b) = blocks.get(cur.len()) else {
            out.push(cur.clone());
            return;
        };
        for (j, a) in l2.args.iter().enumerate() {
            if a == *b && !cur.contains(&j) {
                cur.push(j);
                rec(blocks, l2, cur, out);
                cur.pop();
            }
        }
    }
    rec(blocks, l2, &mut cur, &mut out);
    out
}

/// New templates adding one component built from a literal of the failing
/// schema that deletes what it requires, so that the schema becomes
/// balanced or its durative schema simply safe.
pub fn repair(t: &Template, site: &RepairSite, d: &CanonicalDomain, mode: Mode, opts: Options) -> Vec<Template> {
    if t.components().len() >= opts.repair_cap {
        return Vec::new();
    }
    let alpha = d.schema(site.schema);
    let pure = site.class.pure(alpha);
    let [l] = pure.eff_plus.iter().collect::<Vec<_>>()[..] else {
        return Vec::new();
    };
    let mut candidates: BTreeSet<&Literal> = alpha.pre_plus.intersection(&alpha.eff_minus).collect();
    let aux;
    if let (Mode::Tis, SchemaRef::Frag(i, FragmentKind::End)) = (mode, site.schema) {
        aux = lifted::make_aux(&d.dur_schemas[i]);
        candidates.extend(aux.st_star.pre_plus.intersection(&aux.st_star.eff_minus));
        candidates.extend(aux.st_star.pre_plus.intersection(&aux.end_star.eff_minus));
    }
    let k = t.k();
    let mut out: Vec<Template> = Vec::new();
    for (m, ci) in &site.class.members {
        if m != l {
            continue;
        }
        let c = &t.components()[*ci];
        let blocks: Vec<&crate::canon::Arg> = c.fixed.iter().map(|&p| &l.args[p]).collect();
        for l2 in &candidates {
            if *l2 == l || (l2.arity() != k && l2.arity() != k + 1) || d.static_relations.contains(&l2.rel) {
                continue;
            }
            for fixed in block_positions(&blocks, l2) {
                let a2 = l2.arity();
                let counted: Vec<usize> =
                    if opts.repair_exhaustive { (0..=a2).collect() } else { vec![(0..a2).find(|j| !fixed.contains(j)).unwrap_or(a2)] };
                for p in counted {
                    if fixed.contains(&p) {
                        continue;
                    }
                    let mut comps = t.components().to_vec();
                    comps.push(Component { rel: l2.rel.clone(), arity: a2, counted: p, fixed: fixed.clone() });
                    if let Ok(nt) = Template::new(comps) {
                        if nt.components().len() > t.components().len() && !out.contains(&nt) {
                            out.push(nt);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Every class of every fragment is irrelevant or balanced.
pub fn check_simple(t: &Template, d: &CanonicalDomain) -> Verdict {
    let mut failures = Vec::new();
    for r in d.all_schemas() {
        let s = d.schema(r);
        for c in t_classes(s.literals(), t) {
            let cls = classify_pure(s, &c, t);
            if !cls.irrelevant_or_balanced() {
                failures.push(Failure { schema: r, schema_name: s.name.clone(), class: c, classification: cls });
            }
        }
    }
    if failures.is_empty() {
        Verdict::Invariant(Proof::ByCorAllStronglySafe)
    } else {
        Verdict::Unknown(failures)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Accepted {
    pub template: Template,
    pub proof: Option<Proof>,
    pub via_fix: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Rejected {
    pub template: Template,
    pub via_fix: bool,
    pub reason: String,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Stats {
    pub initial: usize,
    pub checked: usize,
    pub accepted: usize,
    pub via_fix: usize,
    pub rejected: usize,
    /// Repairs skipped because the template already had the maximum
    /// number of components.
    pub capped: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timing {
    pub check_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthesisReport {
    pub mode: Mode,
    pub accepted: Vec<Accepted>,
    pub rejected: Vec<Rejected>,
    pub stats: Stats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl SynthesisReport {
    /// One template key per line, repaired ones marked.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for a in &self.accepted {
            s.push_str(a.template.key());
            if a.via_fix {
                s.push_str(" [fix]");
            }
            s.push('\n');
        }
        s
    }

    pub fn contains(&self, key: &str) -> Option<&Accepted> {
        self.accepted.iter().find(|a| a.template.key() == key)
    }
}

fn check(t: &Template, d: &CanonicalDomain, mode: Mode) -> Verdict {
    match mode {
        Mode::Tis => check_invariance(t, d),
        Mode::Sis => check_simple(t, d),
    }
}

/// Runs the worklist to a fixpoint. Templates are processed generation by
/// generation; checks within a generation run in parallel, the merge is
/// sequential so the report does not depend on the thread count.
pub fn synthesize(d: &CanonicalDomain, mode: Mode, opts: Options) -> SynthesisReport {
    let start = Instant::now();
    let mut check_time = 0.0;
    let initial = initial_templates(d);
    let mut stats = Stats { initial: initial.len(), ..Stats::default() };
    let mut seen: HashSet<String> = initial.iter().map(|t| t.key().to_string()).collect();
    let mut generation: Vec<(Template, bool)> = initial.into_iter().map(|t| (t, false)).collect();
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    while !generation.is_empty() {
        let t0 = Instant::now();
        let verdicts: Vec<Option<Verdict>> = generation.par_iter().map(|(t, _)| (!t.is_singleton()).then(|| check(t, d, mode))).collect();
        check_time += t0.elapsed().as_secs_f64();
        let mut next = Vec::new();
        for ((t, via_fix), v) in generation.into_iter().zip(verdicts) {
            stats.checked += 1;
            match v {
                None => rejected.push(Rejected {
                    template: t,
                    via_fix,
                    reason: "trivial: every instance is a single atom".to_string(),
                    failures: Vec::new(),
                }),
                Some(Verdict::Invariant(p)) => {
                    log::info!("accepted {t} ({p})");
                    accepted.push(Accepted { template: t, proof: (mode == Mode::Tis).then_some(p), via_fix });
                }
                Some(Verdict::Unknown(failures)) => {
                    log::info!("rejected {t}");
                    let mut sites: Vec<(SchemaRef, Vec<crate::canon::Arg>)> = Vec::new();
                    for f in failures.iter().filter(|f| f.classification == Classification::Relevant(lifted::RelevantKind::Unbounded)) {
                        let key = (f.schema, f.class.signature.clone());
                        if sites.contains(&key) {
                            continue;
                        }
                        sites.push(key);
                        if t.components().len() >= opts.repair_cap {
                            stats.capped += 1;
                            continue;
                        }
                        for nt in repair(&t, &RepairSite::from(f), d, mode, opts) {
                            if seen.insert(nt.key().to_string()) {
                                log::debug!("repair of {t} at {}: {nt}", f.schema_name);
                                next.push((nt, true));
                            }
                        }
                    }
                    let reason = if failures.is_empty() {
                        "pairwise conditions fail".to_string()
                    } else {
                        failures.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("; ")
                    };
                    rejected.push(Rejected { template: t, via_fix, reason, failures });
                }
            }
        }
        generation = next;
    }
    stats.accepted = accepted.len();
    stats.via_fix = accepted.iter().filter(|a: &&Accepted| a.via_fix).count();
    stats.rejected = rejected.len();
    SynthesisReport {
        mode,
        accepted,
        rejected,
        stats,
        timing: Some(Timing { check_seconds: check_time, total_seconds: start.elapsed().as_secs_f64() }),
    }
}
