//! The invariance decision procedure over a whole domain.

use std::fmt;

use serde::Serialize;

use super::auxiliary::{aux_executable, aux_reachable, aux_unreachable, make_aux, simply_safe_type, AuxSchema, SafeType};
use super::classes::{classify_pure, t_classes, Classification, TClass};
use super::pairs::{class_matching, common, m_mutex, pair_unreachable, sequence_weight_lower, unifiable, PairKind, Reduced};
use crate::canon::{CanonicalDomain, DurativeSchema, FragmentKind, InstantaneousSchema, Literal, SchemaRef};
use crate::template::Template;

/// Which sufficient condition proved the template invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Proof {
    /// Every instantaneous schema and fragment is strongly safe.
    ByCorAllStronglySafe,
    /// Dangerous durative classes are simply safe of type (a), everything
    /// else irrelevant or balanced.
    ByCorTypeA,
    /// Auxiliary schemas reachable and strongly safe, ends isolated.
    ByCorStarSafety,
    /// Auxiliary schemas safe, dangerous starts cannot intertwine.
    ByCorNonIntertwining,
}

impl fmt::Display for Proof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A schema restricted to a class that blocks every proof.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    #[serde(skip)]
    pub schema: SchemaRef,
    #[serde(rename = "schema")]
    pub schema_name: String,
    #[serde(serialize_with = "ser_class")]
    pub class: TClass,
    pub classification: Classification,
}

fn ser_class<S: serde::Serializer>(c: &TClass, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&c.to_string())
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.schema_name, self.class, self.classification)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Invariant(Proof),
    Unknown(Vec<Failure>),
}

impl Verdict {
    pub fn is_invariant(&self) -> bool {
        matches!(self, Verdict::Invariant(_))
    }
}

/// One class of a durative schema with the classification of each
/// fragment and auxiliary fragment restricted to it.
#[derive(Debug, Clone)]
struct DurClass {
    class: TClass,
    st: Classification,
    inv: Classification,
    end: Classification,
    st_star: Classification,
    end_star: Classification,
    /// Start or end is not strongly safe.
    dangerous: bool,
    simple: Option<SafeType>,
}

impl DurClass {
    fn of(&self, k: FragmentKind) -> Classification {
        match k {
            FragmentKind::Start => self.st,
            FragmentKind::Inv => self.inv,
            FragmentKind::End => self.end,
        }
    }
}

struct DurInfo {
    aux: AuxSchema,
    executable: bool,
    classes: Vec<DurClass>,
}

/// One sufficient condition of the decision procedure.
type Check<'a> = fn(&Analysis<'a>) -> bool;

/// Classifications of every schema of a domain for one template, shared
/// by the individual checks.
pub struct Analysis<'a> {
    t: &'a Template,
    d: &'a CanonicalDomain,
    inst: Vec<Vec<(TClass, Classification)>>,
    dur: Vec<DurInfo>,
    trace: Vec<String>,
}

impl<'a> Analysis<'a> {
    pub fn new(t: &'a Template, d: &'a CanonicalDomain) -> Self {
        let inst = d
            .inst_schemas
            .iter()
            .map(|s| t_classes(s.literals(), t).into_iter().map(|c| (c.clone(), classify_pure(s, &c, t))).collect())
            .collect();
        let dur = d
            .dur_schemas
            .iter()
            .map(|ds| {
                let aux = make_aux(ds);
                let classes = t_classes(ds.literals(), t)
                    .into_iter()
                    .map(|c| {
                        let st = classify_pure(&ds.st, &c, t);
                        let end = classify_pure(&ds.end, &c, t);
                        DurClass {
                            st,
                            inv: classify_pure(&ds.inv, &c, t),
                            end,
                            st_star: classify_pure(&aux.st_star, &c, t),
                            end_star: classify_pure(&aux.end_star, &c, t),
                            dangerous: !(st.strongly_safe() && end.strongly_safe()),
                            simple: simply_safe_type(ds, &aux, &c, t),
                            class: c,
                        }
                    })
                    .collect();
                DurInfo { executable: aux_executable(&aux), aux, classes }
            })
            .collect();
        Analysis { t, d, inst, dur, trace: Vec::new() }
    }

    fn note(&mut self, s: String) {
        log::debug!("{}: {s}", self.t);
        self.trace.push(s);
    }

    /// Lines explaining each step of the last [`Analysis::decide`].
    pub fn trace(&self) -> &[String] {
        &self.trace
    }

    fn native_strongly_safe(&self) -> bool {
        self.inst.iter().all(|cs| cs.iter().all(|(_, c)| c.strongly_safe()))
    }

    fn dangerous(&self) -> impl Iterator<Item = (usize, &DurClass)> {
        self.dur.iter().enumerate().flat_map(|(i, di)| di.classes.iter().filter(|c| c.dangerous).map(move |c| (i, c)))
    }

    fn all_strongly_safe(&self) -> bool {
        self.native_strongly_safe() && self.dur.iter().all(|di| di.classes.iter().all(|c| !c.dangerous && c.inv.strongly_safe()))
    }

    fn type_a(&self) -> bool {
        let inst_ok = self.inst.iter().all(|cs| cs.iter().all(|(_, c)| c.irrelevant_or_balanced()));
        inst_ok
            && self.dur.iter().all(|di| {
                di.classes.iter().all(|c| {
                    if c.dangerous {
                        c.simple == Some(SafeType::A) && c.inv.irrelevant_or_balanced()
                    } else {
                        c.st.irrelevant_or_balanced() && c.inv.irrelevant_or_balanced() && c.end.irrelevant_or_balanced()
                    }
                })
            })
    }

    fn star_safe(&self) -> bool {
        self.native_strongly_safe()
            && self
                .dangerous()
                .all(|(i, c)| aux_reachable(&self.dur[i].aux, &c.class) && c.st_star.strongly_safe() && c.end_star.strongly_safe())
    }

    /// The auxiliary schema restricted to the class is safe on its own.
    fn class_safe(&self, di: &DurInfo, c: &DurClass) -> bool {
        !c.dangerous
            || (c.st_star.strongly_safe() && c.end_star.strongly_safe())
            || (c.st_star.strongly_safe() && aux_unreachable(&di.aux, &c.class))
            || c.simple.is_some()
    }

    fn aux_safe(&self) -> bool {
        self.dur.iter().all(|di| di.executable && di.classes.iter().all(|c| self.class_safe(di, c)))
    }

    fn dur_schema(&self, i: usize) -> &DurativeSchema {
        &self.d.dur_schemas[i]
    }

    /// No two dangerous durative schemas can end together to add two atoms.
    pub fn right_isolated(&self) -> bool {
        let dangerous: Vec<(usize, &DurClass)> = self.dangerous().collect();
        for &(i1, c1) in &dangerous {
            for &(i2, c2) in &dangerous {
                let (d1, d2) = (self.dur_schema(i1), self.dur_schema(i2));
                let Some(m) = class_matching(&c1.class, &c2.class) else {
                    continue;
                };
                let r = Reduced::new(&m);
                let adds: crate::canon::LitSet =
                    r.left(&c1.class.restrict(&d1.end.eff_plus)).into_iter().chain(r.right(&c2.class.restrict(&d2.end.eff_plus))).collect();
                let ok = super::classes::weight(&adds).le_one()
                    || m_mutex(&d1.end, &d2.end, &r)
                    || m_mutex(&d1.inv, &d2.inv, &r)
                    || pair_unreachable(PairKind::InvEnd, (&d1.inv, &d2.inv), (&d1.end, &d2.end), (&c1.class, &c2.class));
                if !ok {
                    log::debug!("{}: ends of {} and {} not isolated", self.t, d1.name, d2.name);
                    return false;
                }
            }
        }
        true
    }

    /// No two dangerous durative schemas can start together.
    pub fn left_isolated(&self) -> bool {
        let dangerous: Vec<(usize, &DurClass)> = self.dangerous().collect();
        for &(i1, c1) in &dangerous {
            for &(i2, c2) in &dangerous {
                let (d1, d2) = (self.dur_schema(i1), self.dur_schema(i2));
                let Some(m) = class_matching(&c1.class, &c2.class) else {
                    continue;
                };
                let r = Reduced::new(&m);
                let ok = m_mutex(&d1.st, &d2.st, &r)
                    || m_mutex(&d1.inv, &d2.inv, &r)
                    || pair_unreachable(PairKind::StInv, (&d1.st, &d2.st), (&d1.inv, &d2.inv), (&c1.class, &c2.class));
                if !ok {
                    log::debug!("{}: starts of {} and {} not isolated", self.t, d1.name, d2.name);
                    return false;
                }
            }
        }
        true
    }

    /// Fragments whose groundings may be irrelevant for some instance: no
    /// template literal at all, a class restricted to nothing relevant, or
    /// fixed blocks that a grounding may leave uncovered.
    fn possibly_irrelevant(&self) -> Vec<&InstantaneousSchema> {
        let mut out = Vec::new();
        for r in self.d.all_schemas() {
            let s = self.d.schema(r);
            let classes = t_classes(s.literals(), self.t);
            if classes.is_empty() || self.t.k() > 0 || classes.iter().any(|c| classify_pure(s, c, self.t) == Classification::Irrelevant) {
                out.push(s);
            }
        }
        out
    }

    /// `(a1, a2)` is strongly irrelevant unreachable for the two classes:
    /// a2 needs something a1 settled that no irrelevant schema can undo,
    /// or the two need two atoms of the instance.
    pub fn strongly_irrelevant_unreachable(&self, a1: &InstantaneousSchema, l1: &TClass, a2: &InstantaneousSchema, l2: &TClass) -> bool {
        let Some(m) = class_matching(l1, l2) else {
            return true;
        };
        let r = Reduced::new(&m);
        let undoers = self.possibly_irrelevant();
        let blocked = |lit: &Literal, set: fn(&InstantaneousSchema) -> &crate::canon::LitSet| {
            undoers.iter().all(|s| set(s).iter().all(|e| !unifiable(lit, e)))
        };
        let g1p = r.left(&a1.gamma_plus());
        let g1m = r.left(&a1.gamma_minus());
        let p2m = r.right(&a2.pre_minus);
        let p2p = r.right(&a2.pre_plus);
        if common(&g1p, &p2m).any(|(l, _)| blocked(l, |s| &s.eff_minus)) {
            return true;
        }
        if common(&g1m, &p2p).any(|(l, _)| blocked(l, |s| &s.eff_plus)) {
            return true;
        }
        sequence_weight_lower(a1, l1, a2, l2, &r).ge_two()
    }

    /// Left isolation plus the start/other-schema condition for every
    /// dangerous class.
    pub fn non_intertwining(&self) -> bool {
        if !self.left_isolated() {
            return false;
        }
        let mut others: Vec<(&InstantaneousSchema, TClass)> = Vec::new();
        for (i, s) in self.d.inst_schemas.iter().enumerate() {
            for (c, cls) in &self.inst[i] {
                if *cls != Classification::Irrelevant {
                    others.push((s, c.clone()));
                }
            }
        }
        for (i, di) in self.dur.iter().enumerate() {
            let ds = self.dur_schema(i);
            for c in &di.classes {
                for (k, frag) in ds.fragments() {
                    let in_end = c.dangerous && k == FragmentKind::End;
                    let in_st = c.dangerous && k == FragmentKind::Start;
                    if (!in_end && c.of(k) != Classification::Irrelevant) || in_st {
                        others.push((frag, c.class.clone()));
                    }
                }
            }
        }
        for (i1, c1) in self.dangerous() {
            let d1 = self.dur_schema(i1);
            for (a2, l2) in &others {
                let mutex_inv = class_matching(&c1.class, l2).is_none_or(|m| m_mutex(&d1.inv, a2, &Reduced::new(&m)));
                if !mutex_inv && !self.strongly_irrelevant_unreachable(&d1.st, &c1.class, a2, l2) {
                    log::debug!("{}: {} may intertwine with {}", self.t, d1.st.name, a2.name);
                    return false;
                }
            }
        }
        true
    }

    fn failures(&self) -> Vec<Failure> {
        let mut out = Vec::new();
        for (i, cs) in self.inst.iter().enumerate() {
            for (c, cls) in cs {
                if !cls.strongly_safe() {
                    out.push(Failure {
                        schema: SchemaRef::Inst(i),
                        schema_name: self.d.inst_schemas[i].name.clone(),
                        class: c.clone(),
                        classification: *cls,
                    });
                }
            }
        }
        let unsafe_exists = self.dur.iter().any(|di| !di.executable || di.classes.iter().any(|c| !self.class_safe(di, c)));
        for (i, di) in self.dur.iter().enumerate() {
            for c in &di.classes {
                if !c.dangerous || (unsafe_exists && di.executable && self.class_safe(di, c)) {
                    continue;
                }
                for k in [FragmentKind::Start, FragmentKind::End] {
                    let cls = c.of(k);
                    if !cls.strongly_safe() {
                        out.push(Failure {
                            schema: SchemaRef::Frag(i, k),
                            schema_name: self.dur_schema(i).fragment(k).name.clone(),
                            class: c.class.clone(),
                            classification: cls,
                        });
                    }
                }
            }
        }
        out
    }

    /// Applies the sufficient conditions in order of cost; the first that
    /// holds proves the template.
    pub fn decide(&mut self) -> Verdict {
        self.trace.clear();
        let steps: [(Proof, Check<'a>); 4] = [
            (Proof::ByCorAllStronglySafe, Self::all_strongly_safe),
            (Proof::ByCorTypeA, Self::type_a),
            (Proof::ByCorStarSafety, |a| a.star_safe() && a.right_isolated()),
            (Proof::ByCorNonIntertwining, |a| a.native_strongly_safe() && a.aux_safe() && a.non_intertwining()),
        ];
        for (proof, check) in steps {
            let ok = check(self);
            self.note(format!("{proof}: {}", if ok { "holds" } else { "fails" }));
            if ok {
                return Verdict::Invariant(proof);
            }
        }
        let f = self.failures();
        for x in &f {
            self.note(format!("failure: {x}"));
        }
        Verdict::Unknown(f)
    }

    /// Per-class details of every durative schema, for diagnostics.
    pub fn describe(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, cs) in self.inst.iter().enumerate() {
            for (c, cls) in cs {
                out.push(format!("{} {c}: {cls}", self.d.inst_schemas[i].name));
            }
        }
        for (i, di) in self.dur.iter().enumerate() {
            let name = &self.dur_schema(i).name;
            if !di.executable {
                out.push(format!("{name}: auxiliary schema not executable"));
            }
            for c in &di.classes {
                let simple = c.simple.map_or_else(|| "-".to_string(), |s| format!("{s:?}"));
                out.push(format!(
                    "{name} {}: st {}, inv {}, end {}, st* {}, end* {}, simply safe {simple}{}",
                    c.class,
                    c.st,
                    c.inv,
                    c.end,
                    c.st_star,
                    c.end_star,
                    if c.dangerous { ", dangerous" } else { "" }
                ));
            }
        }
        out
    }
}

/// Runs the decision procedure for one template.
pub fn check_invariance(t: &Template, d: &CanonicalDomain) -> Verdict {
    Analysis::new(t, d).decide()
}
