//! Templates: components with an admissible partition of their fixed
//! argument positions, their instances, instantiations and weights.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Add;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::canon::GroundAtom;

/// Symbolic weight with `Many` standing for ω (two or more atoms).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SymWeight {
    Zero,
    One,
    Many,
}

impl SymWeight {
    pub fn from_count(n: usize) -> Self {
        match n {
            0 => SymWeight::Zero,
            1 => SymWeight::One,
            _ => SymWeight::Many,
        }
    }

    pub fn is_zero(self) -> bool {
        self == SymWeight::Zero
    }

    pub fn is_one(self) -> bool {
        self == SymWeight::One
    }

    pub fn le_one(self) -> bool {
        self != SymWeight::Many
    }

    pub fn ge_two(self) -> bool {
        self == SymWeight::Many
    }
}

impl Add for SymWeight {
    type Output = SymWeight;

    fn add(self, rhs: SymWeight) -> SymWeight {
        use SymWeight::*;
        match (self, rhs) {
            (Zero, x) | (x, Zero) => x,
            _ => Many,
        }
    }
}

impl std::iter::Sum for SymWeight {
    fn sum<I: Iterator<Item = SymWeight>>(iter: I) -> SymWeight {
        iter.fold(SymWeight::Zero, Add::add)
    }
}

/// A relation with at most one counted position. `fixed[b]` is the
/// argument position that belongs to partition block `b`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Component {
    pub rel: String,
    pub arity: usize,
    /// Counted position; equal to `arity` when there is none.
    pub counted: usize,
    pub fixed: Vec<usize>,
}

impl Component {
    pub fn has_counted(&self) -> bool {
        self.counted < self.arity
    }

    /// Block of a fixed position.
    pub fn block_of(&self, pos: usize) -> Option<usize> {
        self.fixed.iter().position(|&p| p == pos)
    }

    fn render(&self, perm: &[usize]) -> String {
        let mut s = self.rel.clone();
        for &b in perm {
            s.push_str(&format!(" {}", self.fixed[b]));
        }
        if self.has_counted() {
            s.push_str(&format!(" [{}]", self.counted));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("template has no components")]
    Empty,
    #[error("component '{0}': positions do not form a valid fixed/counted split")]
    BadPositions(String),
    #[error("partition is not admissible: components disagree on the number of fixed arguments")]
    NotAdmissible,
    #[error("cannot parse template '{0}'")]
    Syntax(String),
}

/// A template `(C, F_C)`. Blocks are the indices `0..k`; every component
/// contributes exactly one fixed position to each block, which is the
/// admissibility condition.
#[derive(Debug, Clone)]
pub struct Template {
    components: Vec<Component>,
    k: usize,
    key: String,
}

impl PartialEq for Template {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for Template {}

impl std::hash::Hash for Template {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key.hash(state)
    }
}

impl Template {
    pub fn new(components: Vec<Component>) -> Result<Self, TemplateError> {
        let Some(first) = components.first() else {
            return Err(TemplateError::Empty);
        };
        let k = first.fixed.len();
        let mut seen = BTreeSet::new();
        let mut comps = Vec::new();
        for c in components {
            let mut all: Vec<usize> = c.fixed.clone();
            if c.has_counted() {
                all.push(c.counted);
            }
            all.sort_unstable();
            if c.counted > c.arity || all != (0..c.arity).collect::<Vec<_>>() {
                return Err(TemplateError::BadPositions(c.rel));
            }
            if c.fixed.len() != k {
                return Err(TemplateError::NotAdmissible);
            }
            if seen.insert(c.clone()) {
                comps.push(c);
            }
        }
        let key = canonical_key(&comps, k);
        Ok(Template { components: comps, k, key })
    }

    /// Single-component template with the trivial partition (fixed
    /// positions in increasing order).
    pub fn single(rel: &str, arity: usize, counted: usize) -> Self {
        let fixed = (0..arity).filter(|&i| i != counted).collect();
        Template::new(vec![Component { rel: rel.to_string(), arity, counted, fixed }]).expect("valid single component")
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Number of blocks (fixed arguments per component).
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    /// Single component without a counted argument: every instantiation is
    /// one atom.
    pub fn is_singleton(&self) -> bool {
        self.components.len() == 1 && !self.components[0].has_counted()
    }

    /// Parses the notation produced by [`Template::key`], e.g.
    /// `{clear 0, robot-at 1 [0]}`. The i-th bare position of each
    /// component belongs to block i.
    pub fn parse(s: &str) -> Result<Self, TemplateError> {
        let bad = || TemplateError::Syntax(s.to_string());
        let inner = s.trim().strip_prefix('{').and_then(|x| x.strip_suffix('}')).ok_or_else(bad)?;
        let mut comps = Vec::new();
        for part in inner.split(',') {
            let mut toks = part.split_whitespace();
            let rel = toks.next().ok_or_else(bad)?.to_lowercase();
            let mut fixed = Vec::new();
            let mut counted = None;
            for t in toks {
                if let Some(x) = t.strip_prefix('[').and_then(|x| x.strip_suffix(']')) {
                    if counted.is_some() {
                        return Err(bad());
                    }
                    counted = Some(x.parse::<usize>().map_err(|_| bad())?);
                } else {
                    if counted.is_some() {
                        return Err(bad());
                    }
                    fixed.push(t.parse::<usize>().map_err(|_| bad())?);
                }
            }
            let arity = fixed.len() + usize::from(counted.is_some());
            comps.push(Component { rel, arity, counted: counted.unwrap_or(arity), fixed });
        }
        Template::new(comps)
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key)
    }
}

impl Serialize for Template {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.key)
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

/// Lexicographically least rendering over all block orders, so the key is
/// invariant under component reordering and block renaming.
fn canonical_key(comps: &[Component], k: usize) -> String {
    permutations(k)
        .into_iter()
        .map(|perm| {
            let mut parts: Vec<String> = comps.iter().map(|c| c.render(&perm)).collect();
            parts.sort();
            format!("{{{}}}", parts.join(", "))
        })
        .min()
        .expect("at least one permutation")
}

/// An injective assignment of objects to partition blocks.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TemplateInstance(pub Vec<String>);

impl fmt::Display for TemplateInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.join(", "))
    }
}

/// Every injective assignment of `objects` to the blocks of `t`, in
/// lexicographic order of object indices.
pub fn enumerate_instances(t: &Template, objects: &[String]) -> Vec<TemplateInstance> {
    let k = t.k();
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::with_capacity(k);
    fn rec(k: usize, n: usize, cur: &mut Vec<usize>, objects: &[String], out: &mut Vec<TemplateInstance>) {
        if cur.len() == k {
            out.push(TemplateInstance(cur.iter().map(|&i| objects[i].clone()).collect()));
            return;
        }
        for i in 0..n {
            if !cur.contains(&i) {
                cur.push(i);
                rec(k, n, cur, objects, out);
                cur.pop();
            }
        }
    }
    rec(k, objects.len(), &mut cur, objects, &mut out);
    out
}

/// The ground atoms `γ(T)`: fixed positions bound by the instance, the
/// counted position swept over all objects.
pub fn instantiate(t: &Template, g: &TemplateInstance, objects: &[String]) -> BTreeSet<GroundAtom> {
    let mut out = BTreeSet::new();
    for c in t.components() {
        let mut args = vec![String::new(); c.arity];
        for (b, &p) in c.fixed.iter().enumerate() {
            args[p] = g.0[b].clone();
        }
        if c.has_counted() {
            for o in objects {
                args[c.counted] = o.clone();
                out.insert(GroundAtom { rel: c.rel.clone(), args: args.clone() });
            }
        } else {
            out.insert(GroundAtom { rel: c.rel.clone(), args });
        }
    }
    out
}

/// `|s ∩ inst|`.
pub fn instance_weight(s: &BTreeSet<GroundAtom>, inst: &BTreeSet<GroundAtom>) -> usize {
    if s.len() < inst.len() {
        s.iter().filter(|a| inst.contains(*a)).count()
    } else {
        inst.iter().filter(|a| s.contains(*a)).count()
    }
}
