//! Template classes of literals and classification of pure schemas.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::canon::{Arg, InstantaneousSchema, LitSet, Literal};
use crate::template::{SymWeight, Template};

/// Literals of one schema that match the template with the same arguments
/// at equivalent fixed positions. The class is identified by its
/// signature: the argument sitting in each partition block.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TClass {
    pub signature: Vec<Arg>,
    /// Member literals with the index of the component they match through.
    pub members: BTreeSet<(Literal, usize)>,
}

impl TClass {
    pub fn contains(&self, l: &Literal) -> bool {
        self.members.iter().any(|(m, _)| m == l)
    }

    pub fn literals(&self) -> BTreeSet<&Literal> {
        self.members.iter().map(|(l, _)| l).collect()
    }

    pub fn restrict(&self, s: &LitSet) -> LitSet {
        s.iter().filter(|l| self.contains(l)).cloned().collect()
    }

    /// The pure schema `α_L`.
    pub fn pure(&self, s: &InstantaneousSchema) -> InstantaneousSchema {
        InstantaneousSchema {
            name: s.name.clone(),
            params: s.params.clone(),
            pre_plus: self.restrict(&s.pre_plus),
            pre_minus: self.restrict(&s.pre_minus),
            eff_plus: self.restrict(&s.eff_plus),
            eff_minus: self.restrict(&s.eff_minus),
        }
    }
}

impl fmt::Display for TClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ls: Vec<String> = self.literals().iter().map(|l| l.to_string()).collect();
        write!(f, "{{{}}}", ls.join(", "))
    }
}

/// Does `l` match component `c` of `t`? Quantified literals match only when
/// their single quantified position is the counted one.
pub fn matches_component(l: &Literal, t: &Template, ci: usize) -> bool {
    let c = &t.components()[ci];
    if l.rel != c.rel || l.arity() != c.arity {
        return false;
    }
    let q = l.quant_positions();
    q.is_empty() || (c.has_counted() && q == [c.counted])
}

fn signature(l: &Literal, t: &Template, ci: usize) -> Vec<Arg> {
    t.components()[ci].fixed.iter().map(|&p| l.args[p].clone()).collect()
}

/// Partitions the matching literals of `lits` into template classes, in
/// signature order.
pub fn t_classes<'a>(lits: impl IntoIterator<Item = &'a Literal>, t: &Template) -> Vec<TClass> {
    let mut by_sig: BTreeMap<Vec<Arg>, BTreeSet<(Literal, usize)>> = BTreeMap::new();
    let distinct: BTreeSet<&Literal> = lits.into_iter().collect();
    for l in distinct {
        for ci in 0..t.components().len() {
            if matches_component(l, t, ci) {
                by_sig.entry(signature(l, t, ci)).or_default().insert((l.clone(), ci));
            }
        }
    }
    by_sig.into_iter().map(|(signature, members)| TClass { signature, members }).collect()
}

/// Symbolic weight of a literal set: one per simple literal, ω per
/// quantified literal.
pub fn weight(s: &LitSet) -> SymWeight {
    s.iter().map(|l| if l.is_quantified() { SymWeight::Many } else { SymWeight::One }).sum()
}

/// `b` contains every ground atom of `a` for any grounding.
pub fn subsumes(b: &Literal, a: &Literal) -> bool {
    b.rel == a.rel && b.args.len() == a.args.len() && b.args.iter().zip(&a.args).all(|(x, y)| x.is_quant() || x == y)
}

pub fn subset(a: &LitSet, b: &LitSet) -> bool {
    a.iter().all(|l| b.iter().any(|m| subsumes(m, l)))
}

/// Both literals share at least one ground atom under every grounding.
pub fn must_overlap(a: &Literal, b: &Literal) -> bool {
    a.rel == b.rel && a.args.len() == b.args.len() && a.args.iter().zip(&b.args).all(|(x, y)| x.is_quant() || y.is_quant() || x == y)
}

pub fn intersects(a: &LitSet, b: &LitSet) -> bool {
    a.iter().any(|x| b.iter().any(|y| must_overlap(x, y)))
}

/// `M` covers every component of the template within class `L`: a counted
/// component needs a quantified literal, other components any literal.
pub fn covers(m: &LitSet, class: &TClass, t: &Template) -> bool {
    t.components()
        .iter()
        .enumerate()
        .all(|(ci, c)| class.members.iter().any(|(l, cj)| *cj == ci && m.contains(l) && (!c.has_counted() || l.is_quantified())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RelevantKind {
    Balanced,
    Unbalanced,
    Bounded,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Classification {
    Unreachable,
    Heavy,
    Irrelevant,
    Relevant(RelevantKind),
}

impl Classification {
    pub fn strongly_safe(self) -> bool {
        matches!(
            self,
            Classification::Unreachable
                | Classification::Irrelevant
                | Classification::Relevant(RelevantKind::Balanced | RelevantKind::Bounded)
        )
    }

    pub fn is_relevant_unbounded(self) -> bool {
        self == Classification::Relevant(RelevantKind::Unbounded)
    }

    pub fn irrelevant_or_balanced(self) -> bool {
        matches!(self, Classification::Irrelevant | Classification::Relevant(RelevantKind::Balanced))
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Unreachable => "unreachable",
            Classification::Heavy => "heavy",
            Classification::Irrelevant => "irrelevant",
            Classification::Relevant(RelevantKind::Balanced) => "relevant balanced",
            Classification::Relevant(RelevantKind::Unbalanced) => "relevant unbalanced",
            Classification::Relevant(RelevantKind::Bounded) => "relevant bounded",
            Classification::Relevant(RelevantKind::Unbounded) => "relevant unbounded",
        })
    }
}

/// Classifies the pure schema `α_L`. `s` need not be restricted already.
pub fn classify_pure(s: &InstantaneousSchema, class: &TClass, t: &Template) -> Classification {
    let p = class.pure(s);
    let w_pre = weight(&p.pre_plus);
    if w_pre.ge_two() {
        return Classification::Unreachable;
    }
    let w_eff = weight(&p.eff_plus);
    if w_eff.ge_two() {
        return Classification::Heavy;
    }
    if w_eff.is_zero() {
        return Classification::Irrelevant;
    }
    let kind = if w_pre.is_one() {
        let eff: LitSet = p.eff_plus.union(&p.eff_minus).cloned().collect();
        if subset(&p.pre_plus, &eff) {
            RelevantKind::Balanced
        } else {
            RelevantKind::Unbalanced
        }
    } else {
        let all: LitSet = p.literals().cloned().collect();
        if covers(&all, class, t) {
            RelevantKind::Bounded
        } else {
            RelevantKind::Unbounded
        }
    };
    Classification::Relevant(kind)
}

/// Every class of the schema's own literals is strongly safe.
pub fn strongly_safe(s: &InstantaneousSchema, t: &Template) -> bool {
    t_classes(s.literals(), t).iter().all(|c| classify_pure(s, c, t).strongly_safe())
}
