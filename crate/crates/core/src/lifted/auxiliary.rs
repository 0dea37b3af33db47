//! Auxiliary durative schemas: start and end with the invariant conditions
//! folded into their preconditions.

use serde::Serialize;

use super::classes::{classify_pure, covers, intersects, subset, weight, Classification, TClass};
use crate::canon::{DurativeSchema, InstantaneousSchema, LitSet};
use crate::template::Template;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxSchema {
    pub st_star: InstantaneousSchema,
    pub end_star: InstantaneousSchema,
}

fn minus(a: &LitSet, b: &LitSet) -> LitSet {
    a.difference(b).cloned().collect()
}

fn union(a: &LitSet, b: &LitSet) -> LitSet {
    a.union(b).cloned().collect()
}

pub fn make_aux(d: &DurativeSchema) -> AuxSchema {
    let mut st = d.st.clone();
    st.name = format!("{}@st*", d.name);
    st.pre_plus.extend(minus(&d.inv.pre_plus, &d.st.eff_plus));
    st.pre_minus.extend(minus(&d.inv.pre_minus, &d.st.eff_minus));
    let mut end = d.end.clone();
    end.name = format!("{}@end*", d.name);
    end.pre_plus.extend(d.inv.pre_plus.iter().cloned());
    end.pre_minus.extend(d.inv.pre_minus.iter().cloned());
    AuxSchema { st_star: st, end_star: end }
}

/// The end can follow the start: nothing the start makes true is required
/// false at the end and vice versa.
pub fn aux_executable(aux: &AuxSchema) -> bool {
    !intersects(&aux.st_star.gamma_plus(), &aux.end_star.pre_minus) && !intersects(&aux.st_star.gamma_minus(), &aux.end_star.pre_plus)
}

fn reach_set(aux: &AuxSchema, class: &TClass) -> LitSet {
    let st = class.pure(&aux.st_star);
    let end = class.pure(&aux.end_star);
    union(&st.pre_plus, &minus(&end.pre_plus, &st.eff_plus))
}

/// Executable, and start plus end together need at most one atom of the
/// instance.
pub fn aux_reachable(aux: &AuxSchema, class: &TClass) -> bool {
    aux_executable(aux) && weight(&reach_set(aux, class)).le_one()
}

/// Executable, but start plus end certainly need two atoms of the
/// instance.
pub fn aux_unreachable(aux: &AuxSchema, class: &TClass) -> bool {
    aux_executable(aux) && weight(&reach_set(aux, class)).ge_two()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SafeType {
    A,
    B,
    C,
    D,
}

/// Type under which the auxiliary durative schema restricted to `class`
/// is simply safe, if any.
pub fn simply_safe_type(d: &DurativeSchema, aux: &AuxSchema, class: &TClass, t: &Template) -> Option<SafeType> {
    if !aux_reachable(aux, class) {
        return None;
    }
    let st_cls = classify_pure(&aux.st_star, class, t);
    if !st_cls.strongly_safe() || !classify_pure(&aux.end_star, class, t).is_relevant_unbounded() {
        return None;
    }
    let st = class.pure(&aux.st_star);
    let end = class.pure(&d.end);
    let end_eff = union(&end.eff_minus, &end.eff_plus);
    let w_pre = weight(&st.pre_plus);
    if st_cls == Classification::Irrelevant {
        if w_pre.is_one() {
            if subset(&st.pre_plus, &st.eff_minus) {
                return Some(SafeType::A);
            }
            if subset(&st.pre_plus, &end_eff) {
                return Some(SafeType::B);
            }
        } else if w_pre.is_zero() {
            let m: LitSet = st.pre_minus.iter().chain(&st.eff_minus).chain(&end_eff).cloned().collect();
            if covers(&m, class, t) {
                return Some(SafeType::C);
            }
        }
        None
    } else if matches!(st_cls, Classification::Relevant(_)) && subset(&class.pure(&d.st).eff_plus, &end_eff) {
        Some(SafeType::D)
    } else {
        None
    }
}
