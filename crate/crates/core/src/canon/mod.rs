//! Canonical action model: sets of universally quantified literals, durative
//! actions split into start/invariant/end fragments, types compiled to
//! static unary relations.

mod text;

pub use text::{parse_canonical, render};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use log::warn;
use serde::Serialize;
use thiserror::Error;

use crate::pddl::{self, ActionKind, Formula, Pos, RawAction, RawDomain, RawProblem, Term, TimeSpec};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Arg {
    Var(String),
    Const(String),
    /// Universally quantified position. Names are normalised to `q<i>` in
    /// order of first occurrence, so equal literals compare equal.
    Quant(String),
}

impl Arg {
    pub fn is_quant(&self) -> bool {
        matches!(self, Arg::Quant(_))
    }

    pub fn var(&self) -> Option<&str> {
        match self {
            Arg::Var(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Var(v) | Arg::Quant(v) => write!(f, "?{v}"),
            Arg::Const(c) => f.write_str(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Literal {
    pub rel: String,
    pub args: Vec<Arg>,
}

impl Literal {
    pub fn new(rel: &str, args: Vec<Arg>) -> Self {
        Literal { rel: rel.to_string(), args }
    }

    /// Shorthand for tests and fixtures: `?x` is a variable, `*` a
    /// quantified position, anything else a constant.
    pub fn parse_simple(rel: &str, args: &[&str]) -> Self {
        let mut q = 0;
        let args = args
            .iter()
            .map(|a| {
                if let Some(v) = a.strip_prefix('?') {
                    Arg::Var(v.to_string())
                } else if *a == "*" {
                    q += 1;
                    Arg::Quant(format!("q{}", q - 1))
                } else {
                    Arg::Const(a.to_string())
                }
            })
            .collect();
        Literal::new(rel, args)
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_quantified(&self) -> bool {
        self.args.iter().any(Arg::is_quant)
    }

    /// Positions holding quantified variables.
    pub fn quant_positions(&self) -> Vec<usize> {
        (0..self.args.len()).filter(|&i| self.args[i].is_quant()).collect()
    }

    pub fn free_vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(Arg::var)
    }

    pub fn rename(&self, f: &impl Fn(&str) -> String) -> Literal {
        let args = self
            .args
            .iter()
            .map(|a| match a {
                Arg::Var(v) => Arg::Var(f(v)),
                other => other.clone(),
            })
            .collect();
        Literal { rel: self.rel.clone(), args }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qs: Vec<String> = self.args.iter().filter(|a| a.is_quant()).map(|a| a.to_string()).collect();
        if !qs.is_empty() {
            write!(f, "(forall ({}) ", qs.join(" "))?;
        }
        write!(f, "({}", self.rel)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")?;
        if !qs.is_empty() {
            f.write_str(")")?;
        }
        Ok(())
    }
}

pub type LitSet = BTreeSet<Literal>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstantaneousSchema {
    pub name: String,
    pub params: Vec<String>,
    pub pre_plus: LitSet,
    pub pre_minus: LitSet,
    pub eff_plus: LitSet,
    pub eff_minus: LitSet,
}

impl InstantaneousSchema {
    pub fn empty(name: &str, params: Vec<String>) -> Self {
        InstantaneousSchema {
            name: name.to_string(),
            params,
            pre_plus: LitSet::new(),
            pre_minus: LitSet::new(),
            eff_plus: LitSet::new(),
            eff_minus: LitSet::new(),
        }
    }

    /// All literals of the four sets.
    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.pre_plus.iter().chain(&self.pre_minus).chain(&self.eff_plus).chain(&self.eff_minus)
    }

    pub fn rename(&self, name: &str, f: &impl Fn(&str) -> String) -> Self {
        let r = |s: &LitSet| s.iter().map(|l| l.rename(f)).collect();
        InstantaneousSchema {
            name: name.to_string(),
            params: self.params.iter().map(|p| f(p)).collect(),
            pre_plus: r(&self.pre_plus),
            pre_minus: r(&self.pre_minus),
            eff_plus: r(&self.eff_plus),
            eff_minus: r(&self.eff_minus),
        }
    }

    /// `Γ⁺ = (Pre⁺ \ Eff⁻) ∪ Eff⁺`: atoms certainly true after the action.
    pub fn gamma_plus(&self) -> LitSet {
        self.pre_plus.difference(&self.eff_minus).chain(&self.eff_plus).cloned().collect()
    }

    /// `Γ⁻ = (Pre⁻ \ Eff⁺) ∪ Eff⁻`: atoms certainly false after the action.
    pub fn gamma_minus(&self) -> LitSet {
        self.pre_minus.difference(&self.eff_plus).chain(&self.eff_minus).cloned().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FragmentKind {
    Start,
    Inv,
    End,
}

impl FragmentKind {
    pub fn suffix(self) -> &'static str {
        match self {
            FragmentKind::Start => "st",
            FragmentKind::Inv => "inv",
            FragmentKind::End => "end",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DurativeSchema {
    pub name: String,
    pub params: Vec<String>,
    pub duration: String,
    pub st: InstantaneousSchema,
    pub inv: InstantaneousSchema,
    pub end: InstantaneousSchema,
}

impl DurativeSchema {
    pub fn fragment(&self, k: FragmentKind) -> &InstantaneousSchema {
        match k {
            FragmentKind::Start => &self.st,
            FragmentKind::Inv => &self.inv,
            FragmentKind::End => &self.end,
        }
    }

    pub fn fragments(&self) -> [(FragmentKind, &InstantaneousSchema); 3] {
        [(FragmentKind::Start, &self.st), (FragmentKind::Inv, &self.inv), (FragmentKind::End, &self.end)]
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.st.literals().chain(self.inv.literals()).chain(self.end.literals())
    }

    pub fn rename(&self, f: &impl Fn(&str) -> String) -> Self {
        DurativeSchema {
            name: self.name.clone(),
            params: self.params.iter().map(|p| f(p)).collect(),
            duration: self.duration.clone(),
            st: self.st.rename(&self.st.name, f),
            inv: self.inv.rename(&self.inv.name, f),
            end: self.end.rename(&self.end.name, f),
        }
    }
}

/// Reference to an instantaneous schema of a domain: a native one or a
/// fragment of a durative one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SchemaRef {
    Inst(usize),
    Frag(usize, FragmentKind),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CanonicalDomain {
    pub name: String,
    /// Relations with arities, including the `is-<type>` relations.
    pub relations: BTreeMap<String, usize>,
    pub static_relations: BTreeSet<String>,
    /// Types with their ancestors (self first, `object` last).
    pub type_chains: BTreeMap<String, Vec<String>>,
    /// Domain constants and their declared type.
    pub constants: Vec<(String, String)>,
    pub inst_schemas: Vec<InstantaneousSchema>,
    pub dur_schemas: Vec<DurativeSchema>,
}

impl CanonicalDomain {
    pub fn schema(&self, r: SchemaRef) -> &InstantaneousSchema {
        match r {
            SchemaRef::Inst(i) => &self.inst_schemas[i],
            SchemaRef::Frag(i, k) => self.dur_schemas[i].fragment(k),
        }
    }

    /// Native instantaneous schemas followed by every durative fragment.
    pub fn all_schemas(&self) -> Vec<SchemaRef> {
        let mut v: Vec<SchemaRef> = (0..self.inst_schemas.len()).map(SchemaRef::Inst).collect();
        for i in 0..self.dur_schemas.len() {
            for k in [FragmentKind::Start, FragmentKind::Inv, FragmentKind::End] {
                v.push(SchemaRef::Frag(i, k));
            }
        }
        v
    }

    pub fn is_modifiable(&self, rel: &str) -> bool {
        self.relations.contains_key(rel) && !self.static_relations.contains(rel)
    }

    /// Modifiable relations in name order.
    pub fn modifiable_relations(&self) -> Vec<(&str, usize)> {
        self.relations.iter().filter(|(r, _)| !self.static_relations.contains(*r)).map(|(r, a)| (r.as_str(), *a)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonError {
    #[error("{pos}: unsupported feature: {what}")]
    UnsupportedFeature { pos: Pos, what: String },
    #[error("{pos}: illegal durative action '{schema}': {literal} violates condition {condition}")]
    IllegalDurative { pos: Pos, schema: String, literal: String, condition: u8 },
    #[error("{pos}: {msg}")]
    Invalid { pos: Pos, msg: String },
}

fn unsupported<T>(pos: Pos, what: impl Into<String>) -> Result<T, CanonError> {
    Err(CanonError::UnsupportedFeature { pos, what: what.into() })
}

/// Normalises a condition or effect formula without temporal annotations
/// into the positive and negative literal sets. `positive = false` treats
/// the whole formula as negated.
pub fn normalize_formula(f: &Formula, positive: bool) -> Result<(LitSet, LitSet), CanonError> {
    let mut plus = LitSet::new();
    let mut minus = LitSet::new();
    norm(f, positive, &mut Vec::new(), &mut plus, &mut minus)?;
    Ok((plus, minus))
}

fn norm(f: &Formula, positive: bool, bound: &mut Vec<String>, plus: &mut LitSet, minus: &mut LitSet) -> Result<(), CanonError> {
    match f {
        Formula::Atom(a) => {
            let mut qnames: Vec<&str> = Vec::new();
            let mut args = Vec::with_capacity(a.args.len());
            for t in &a.args {
                args.push(match t {
                    Term::Const(c) => Arg::Const(c.clone()),
                    Term::Var(v) if bound.iter().any(|b| b == v) => {
                        if qnames.contains(&v.as_str()) {
                            return unsupported(a.pos, format!("quantified variable '?{v}' repeated in '{}'", a.pred));
                        }
                        qnames.push(v);
                        Arg::Quant(format!("q{}", qnames.len() - 1))
                    }
                    Term::Var(v) => Arg::Var(v.clone()),
                });
            }
            let lit = Literal { rel: a.pred.clone(), args };
            if positive {
                plus.insert(lit);
            } else {
                minus.insert(lit);
            }
            Ok(())
        }
        Formula::Not(g, _) => norm(g, !positive, bound, plus, minus),
        Formula::And(gs, pos) => {
            if !positive && gs.len() > 1 {
                return unsupported(*pos, "negated conjunction (disjunction)");
            }
            gs.iter().try_for_each(|g| norm(g, positive, bound, plus, minus))
        }
        Formula::Or(gs, pos) => {
            if positive && gs.len() > 1 {
                return unsupported(*pos, "disjunction");
            }
            gs.iter().try_for_each(|g| norm(g, positive, bound, plus, minus))
        }
        Formula::Forall(vs, g, pos) => {
            if !positive {
                return unsupported(*pos, "negated universal quantifier");
            }
            if vs.iter().any(|v| v.ty.as_deref().is_some_and(|t| t != "object")) {
                warn!("{pos}: typed quantified variable ranges over all objects");
            }
            let n = bound.len();
            bound.extend(vs.iter().map(|v| v.name.clone()));
            let r = norm(g, positive, bound, plus, minus);
            bound.truncate(n);
            r
        }
        Formula::Exists(_, _, pos) => unsupported(*pos, "existential quantifier"),
        Formula::When(_, _, pos) => unsupported(*pos, "conditional effect"),
        Formula::Equal(_, _, pos) => unsupported(*pos, "equality"),
        Formula::Timed(t, _, pos) => unsupported(*pos, format!("unexpected temporal annotation '{}'", t.keyword())),
    }
}

/// Name of the static relation encoding membership in `ty`.
pub fn type_relation(ty: &str) -> String {
    format!("is-{ty}")
}

/// Splits a durative formula into its three temporal parts.
fn split_timed(f: &Formula, out: &mut [Vec<Formula>; 3]) -> Result<(), CanonError> {
    match f {
        Formula::And(gs, _) => gs.iter().try_for_each(|g| split_timed(g, out)),
        Formula::Timed(t, g, _) => {
            let i = match t {
                TimeSpec::AtStart => 0,
                TimeSpec::OverAll => 1,
                TimeSpec::AtEnd => 2,
            };
            out[i].push((**g).clone());
            Ok(())
        }
        other => unsupported(other.pos(), "durative formula part without a temporal annotation"),
    }
}

fn conj(fs: Vec<Formula>) -> Formula {
    Formula::And(fs, Pos::default())
}

fn type_preconditions(a: &RawAction, rename: &impl Fn(&str) -> String) -> LitSet {
    a.params.iter().filter_map(|p| p.ty.as_ref().map(|t| Literal::new(&type_relation(t), vec![Arg::Var(rename(&p.name))]))).collect()
}

fn check_free_vars(s: &InstantaneousSchema, pos: Pos) -> Result<(), CanonError> {
    for l in s.literals() {
        for v in l.free_vars() {
            if !s.params.iter().any(|p| p == v) {
                return Err(CanonError::Invalid { pos, msg: format!("free variable '?{v}' in {l} is not a parameter") });
            }
        }
    }
    Ok(())
}

/// Checks the four illegal-durative conditions, returning the first
/// violation as `(literal, condition number)`.
pub fn illegal_durative(st: &InstantaneousSchema, inv: &InstantaneousSchema, end: &InstantaneousSchema) -> Option<(Literal, u8)> {
    let st_true = st.gamma_plus();
    let st_false = st.gamma_minus();
    let checks: [(&LitSet, &LitSet, u8); 4] = [
        (&inv.pre_minus, &st_true, 1),
        (&inv.pre_plus, &st_false, 2),
        (&inv.pre_plus, &end.pre_minus, 3),
        (&inv.pre_minus, &end.pre_plus, 4),
    ];
    for (a, b, n) in checks {
        if let Some(l) = a.intersection(b).next() {
            return Some((l.clone(), n));
        }
    }
    None
}

/// Transforms a parsed domain into canonical form.
pub fn canonicalize(raw: &RawDomain) -> Result<CanonicalDomain, CanonError> {
    let mut relations = BTreeMap::new();
    for p in &raw.predicates {
        relations.insert(p.name.clone(), p.params.len());
    }
    let mut type_chains = BTreeMap::new();
    let mut type_names: Vec<String> = vec!["object".to_string()];
    type_names.extend(raw.types.iter().map(|(t, _)| t.clone()));
    for t in &type_names {
        let rel = type_relation(t);
        if relations.contains_key(&rel) {
            return Err(CanonError::Invalid {
                pos: Pos::default(),
                msg: format!("predicate '{rel}' clashes with the compiled type relation"),
            });
        }
        relations.insert(rel, 1);
        type_chains.insert(t.clone(), raw.type_chain(t));
    }

    let mut inst_schemas = Vec::new();
    let mut dur_schemas = Vec::new();
    for (idx, a) in raw.actions.iter().enumerate() {
        let rename = |v: &str| format!("{v}_{idx}");
        let params: Vec<String> = a.params.iter().map(|p| rename(&p.name)).collect();
        let types = type_preconditions(a, &rename);
        match &a.kind {
            ActionKind::Instantaneous => {
                let raw_params = a.params.iter().map(|p| p.name.clone()).collect();
                let mut s = InstantaneousSchema::empty(&a.name, raw_params);
                if let Some(c) = &a.condition {
                    let (p, m) = normalize_formula(c, true)?;
                    s.pre_plus = p;
                    s.pre_minus = m;
                }
                if let Some(e) = &a.effect {
                    let (p, m) = normalize_formula(e, true)?;
                    s.eff_plus = p;
                    s.eff_minus = m;
                }
                let mut s = s.rename(&a.name, &rename);
                s.pre_plus.extend(types);
                check_free_vars(&s, a.pos)?;
                inst_schemas.push(s);
            }
            ActionKind::Durative { duration } => {
                let mut conds: [Vec<Formula>; 3] = Default::default();
                let mut effs: [Vec<Formula>; 3] = Default::default();
                if let Some(c) = &a.condition {
                    split_timed(c, &mut conds)?;
                }
                if let Some(e) = &a.effect {
                    split_timed(e, &mut effs)?;
                }
                if let Some(f) = effs[1].first() {
                    return unsupported(f.pos(), "over all effect");
                }
                let mut frags = Vec::new();
                for (i, kind) in [FragmentKind::Start, FragmentKind::Inv, FragmentKind::End].into_iter().enumerate() {
                    let name = format!("{}@{}", a.name, kind.suffix());
                    let mut s = InstantaneousSchema::empty(&name, params.clone());
                    let (p, m) = normalize_formula(&conj(conds[i].clone()), true)?;
                    s.pre_plus = p.iter().map(|l| l.rename(&rename)).collect();
                    s.pre_minus = m.iter().map(|l| l.rename(&rename)).collect();
                    let (p, m) = normalize_formula(&conj(effs[i].clone()), true)?;
                    s.eff_plus = p.iter().map(|l| l.rename(&rename)).collect();
                    s.eff_minus = m.iter().map(|l| l.rename(&rename)).collect();
                    if kind == FragmentKind::Start {
                        s.pre_plus.extend(types.iter().cloned());
                    }
                    check_free_vars(&s, a.pos)?;
                    frags.push(s);
                }
                let end = frags.pop().unwrap();
                let inv = frags.pop().unwrap();
                let st = frags.pop().unwrap();
                if let Some((l, n)) = illegal_durative(&st, &inv, &end) {
                    return Err(CanonError::IllegalDurative { pos: a.pos, schema: a.name.clone(), literal: l.to_string(), condition: n });
                }
                dur_schemas.push(DurativeSchema { name: a.name.clone(), params, duration: duration.clone(), st, inv, end });
            }
        }
    }

    let mut modified = BTreeSet::new();
    let all_effects = inst_schemas
        .iter()
        .chain(dur_schemas.iter().flat_map(|d| [&d.st, &d.inv, &d.end]))
        .flat_map(|s| s.eff_plus.iter().chain(&s.eff_minus));
    for l in all_effects {
        modified.insert(l.rel.clone());
    }
    let static_relations = relations.keys().filter(|r| !modified.contains(*r)).cloned().collect();
    let constants = raw.constants.iter().map(|c| (c.name.clone(), c.ty.clone().unwrap_or_else(|| "object".to_string()))).collect();
    Ok(CanonicalDomain { name: raw.name.clone(), relations, static_relations, type_chains, constants, inst_schemas, dur_schemas })
}

/// A ground atom `rel(o1, ..., on)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GroundAtom {
    pub rel: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new(rel: &str, args: &[&str]) -> Self {
        GroundAtom { rel: rel.to_string(), args: args.iter().map(|s| s.to_string()).collect() }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.rel)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(a)?;
        }
        f.write_str(")")
    }
}

/// Problem objects and initial state, including the compiled type atoms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CanonicalProblem {
    pub name: String,
    pub objects: Vec<String>,
    pub init: BTreeSet<GroundAtom>,
}

/// Compiles a problem against a canonical domain. Domain constants become
/// objects; every object gets `is-T` atoms for its type and its ancestors.
pub fn canonicalize_problem(raw_domain: &RawDomain, dom: &CanonicalDomain, p: &RawProblem) -> Result<CanonicalProblem, pddl::ParseError> {
    pddl::validate_problem(raw_domain, p)?;
    let mut objects = Vec::new();
    let mut init = BTreeSet::new();
    let typed = dom
        .constants
        .iter()
        .cloned()
        .chain(p.objects.iter().map(|o| (o.name.clone(), o.ty.clone().unwrap_or_else(|| "object".to_string()))));
    for (name, ty) in typed {
        if objects.contains(&name) {
            continue;
        }
        for t in dom.type_chains.get(&ty).cloned().unwrap_or_else(|| vec![ty.clone()]) {
            init.insert(GroundAtom { rel: type_relation(&t), args: vec![name.clone()] });
        }
        objects.push(name);
    }
    for a in &p.init {
        init.insert(GroundAtom { rel: a.pred.clone(), args: a.args.clone() });
    }
    Ok(CanonicalProblem { name: p.name.clone(), objects, init })
}
