//! Grounding of instantaneous schemas and ground classification against a
//! template instance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::canon::{Arg, GroundAtom, InstantaneousSchema, LitSet, Literal};
use crate::lifted::{Classification, RelevantKind};

pub type AtomSet = BTreeSet<GroundAtom>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroundError {
    #[error("grounding of {schema} leaves {var} unassigned")]
    Unassigned { schema: String, var: String },
    #[error("grounding of {schema} maps {a} and {b} to the same object {object}")]
    NotInjective { schema: String, a: String, b: String, object: String },
}

/// The schema and variable assignment a ground action came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Origin {
    pub schema: String,
    pub grounding: Vec<(String, String)>,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.schema)?;
        for (_, o) in &self.grounding {
            write!(f, " {o}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct GroundAction {
    pub origin: Origin,
    pub pre_plus: AtomSet,
    pub pre_minus: AtomSet,
    pub eff_plus: AtomSet,
    pub eff_minus: AtomSet,
}

impl GroundAction {
    pub fn pre(&self) -> impl Iterator<Item = &GroundAtom> {
        self.pre_plus.iter().chain(&self.pre_minus)
    }

    pub fn eff(&self) -> impl Iterator<Item = &GroundAtom> {
        self.eff_plus.iter().chain(&self.eff_minus)
    }

    /// Restriction to the atoms of an instance.
    pub fn restrict(&self, inst: &AtomSet) -> GroundAction {
        let r = |s: &AtomSet| s.intersection(inst).cloned().collect();
        GroundAction {
            origin: self.origin.clone(),
            pre_plus: r(&self.pre_plus),
            pre_minus: r(&self.pre_minus),
            eff_plus: r(&self.eff_plus),
            eff_minus: r(&self.eff_minus),
        }
    }
}

fn ground_literal(l: &Literal, gr: &BTreeMap<&str, &str>, objects: &[String], out: &mut AtomSet) {
    let mut quants: Vec<&str> = Vec::new();
    for a in &l.args {
        if let Arg::Quant(q) = a {
            if !quants.contains(&q.as_str()) {
                quants.push(q);
            }
        }
    }
    if !quants.is_empty() && objects.is_empty() {
        return;
    }
    let mut choice = vec![0usize; quants.len()];
    loop {
        let args = l
            .args
            .iter()
            .map(|a| match a {
                Arg::Var(v) => gr[v.as_str()].to_string(),
                Arg::Const(c) => c.clone(),
                Arg::Quant(q) => {
                    let i = quants.iter().position(|x| x == q).expect("collected above");
                    objects[choice[i]].clone()
                }
            })
            .collect();
        out.insert(GroundAtom { rel: l.rel.clone(), args });
        // Next tuple in the sweep, last quantifier fastest.
        let mut i = choice.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < objects.len() {
                break;
            }
            choice[i] = 0;
        }
    }
}

/// `gr(α)`: variables replaced by their objects, quantified positions swept
/// over all of `objects`. `gr` must be total on the schema's variables and
/// injective.
pub fn ground_action(a: &InstantaneousSchema, gr: &BTreeMap<String, String>, objects: &[String]) -> Result<GroundAction, GroundError> {
    ground_action_with(a, gr, objects, false)
}

/// As [`ground_action`], optionally accepting groundings that map two
/// variables to the same object.
pub fn ground_action_with(
    a: &InstantaneousSchema,
    gr: &BTreeMap<String, String>,
    objects: &[String],
    allow_repeats: bool,
) -> Result<GroundAction, GroundError> {
    let mut vars: BTreeSet<&str> = a.params.iter().map(String::as_str).collect();
    vars.extend(a.literals().flat_map(|l| l.free_vars()));
    let mut map: BTreeMap<&str, &str> = BTreeMap::new();
    for v in &vars {
        let Some(o) = gr.get(*v) else {
            return Err(GroundError::Unassigned { schema: a.name.clone(), var: v.to_string() });
        };
        if let Some((w, _)) = map.iter().find(|(_, p)| !allow_repeats && **p == o.as_str()) {
            return Err(GroundError::NotInjective { schema: a.name.clone(), a: w.to_string(), b: v.to_string(), object: o.clone() });
        }
        map.insert(v, o);
    }
    let g = |s: &LitSet| {
        let mut out = AtomSet::new();
        for l in s {
            ground_literal(l, &map, objects, &mut out);
        }
        out
    };
    Ok(GroundAction {
        origin: Origin {
            schema: a.name.clone(),
            grounding: a.params.iter().filter_map(|p| gr.get(p).map(|o| (p.clone(), o.clone()))).collect(),
        },
        pre_plus: g(&a.pre_plus),
        pre_minus: g(&a.pre_minus),
        eff_plus: g(&a.eff_plus),
        eff_minus: g(&a.eff_minus),
    })
}

/// Classification of a ground action against the atoms of one instance.
pub fn classify_ground(a: &GroundAction, inst: &AtomSet) -> Classification {
    let r = a.restrict(inst);
    if r.pre_plus.len() >= 2 {
        return Classification::Unreachable;
    }
    if r.eff_plus.len() >= 2 {
        return Classification::Heavy;
    }
    if r.eff_plus.is_empty() {
        return Classification::Irrelevant;
    }
    let kind = if r.pre_plus.len() == 1 {
        if r.pre_plus.iter().all(|q| r.eff_plus.contains(q) || r.eff_minus.contains(q)) {
            RelevantKind::Balanced
        } else {
            RelevantKind::Unbalanced
        }
    } else {
        let touched: AtomSet = r.pre().chain(r.eff()).cloned().collect();
        if touched == *inst {
            RelevantKind::Bounded
        } else {
            RelevantKind::Unbounded
        }
    };
    Classification::Relevant(kind)
}
