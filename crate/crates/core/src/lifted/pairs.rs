//! Properties of pairs of schemas under the matching induced by two
//! template classes. Both schemas are rewritten into a shared alphabet:
//! matched variables are merged, the rest stay tagged with their side, so
//! a schema may be paired with itself.

use std::collections::BTreeMap;

use super::classes::{must_overlap, TClass};
use crate::canon::{Arg, InstantaneousSchema, LitSet, Literal};
use crate::template::SymWeight;

/// Pairs of arguments at equivalent fixed positions of two classes. Each
/// side's terms appear at most once.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Matching {
    pub pairs: Vec<(Arg, Arg)>,
}

/// The matching `M_{L1,L2}`. `None` when no instance can be coherent with
/// both classes: a repeated term within one signature, two distinct
/// constants paired, or a term paired twice.
pub fn class_matching(l1: &TClass, l2: &TClass) -> Option<Matching> {
    let injective = |s: &[Arg]| (0..s.len()).all(|i| !s[i + 1..].contains(&s[i]));
    if l1.signature.len() != l2.signature.len() || !injective(&l1.signature) || !injective(&l2.signature) {
        return None;
    }
    let mut pairs = Vec::new();
    for (a, b) in l1.signature.iter().zip(&l2.signature) {
        if let (Arg::Const(x), Arg::Const(y)) = (a, b) {
            if x != y {
                return None;
            }
        }
        pairs.push((a.clone(), b.clone()));
    }
    Some(Matching { pairs })
}

/// Rewriting of two schemas' arguments into the reduced alphabet.
#[derive(Debug, Clone)]
pub struct Reduced {
    left: BTreeMap<String, Arg>,
    right: BTreeMap<String, Arg>,
}

const LEFT: &str = "1:";
const RIGHT: &str = "2:";
const MERGED: &str = "=";

impl Reduced {
    pub fn new(m: &Matching) -> Self {
        let mut left = BTreeMap::new();
        let mut right = BTreeMap::new();
        for (a, b) in &m.pairs {
            match (a, b) {
                (Arg::Var(x), Arg::Var(y)) => {
                    let v = Arg::Var(format!("{MERGED}{x}|{y}"));
                    left.insert(x.clone(), v.clone());
                    right.insert(y.clone(), v);
                }
                (Arg::Var(x), c @ Arg::Const(_)) => {
                    left.insert(x.clone(), c.clone());
                }
                (c @ Arg::Const(_), Arg::Var(y)) => {
                    right.insert(y.clone(), c.clone());
                }
                _ => {}
            }
        }
        Reduced { left, right }
    }

    fn rewrite(map: &BTreeMap<String, Arg>, tag: &str, l: &Literal) -> Literal {
        let args = l
            .args
            .iter()
            .map(|a| match a {
                Arg::Var(v) => map.get(v).cloned().unwrap_or_else(|| Arg::Var(format!("{tag}{v}"))),
                other => other.clone(),
            })
            .collect();
        Literal { rel: l.rel.clone(), args }
    }

    pub fn left(&self, s: &LitSet) -> LitSet {
        s.iter().map(|l| Self::rewrite(&self.left, LEFT, l)).collect()
    }

    pub fn right(&self, s: &LitSet) -> LitSet {
        s.iter().map(|l| Self::rewrite(&self.right, RIGHT, l)).collect()
    }
}

fn side(v: &str) -> Option<&'static str> {
    if v.starts_with(LEFT) {
        Some(LEFT)
    } else if v.starts_with(RIGHT) {
        Some(RIGHT)
    } else {
        None
    }
}

/// Two reduced-alphabet literals can denote the same ground atom for some
/// pair of adapted groundings. Only unmerged variables of different sides
/// may coincide; variables never denote constants.
pub fn may_equal(a: &Literal, b: &Literal) -> bool {
    a.rel == b.rel
        && a.args.len() == b.args.len()
        && a.args.iter().zip(&b.args).all(|(x, y)| match (x, y) {
            _ if x == y => true,
            (Arg::Quant(_), _) | (_, Arg::Quant(_)) => true,
            (Arg::Var(p), Arg::Var(q)) => matches!((side(p), side(q)), (Some(s), Some(t)) if s != t),
            _ => false,
        })
}

/// Lower bound of the weight of a set of reduced literals: literals that
/// pairwise cannot coincide are counted.
pub fn weight_lower<'a>(lits: impl IntoIterator<Item = &'a Literal>) -> SymWeight {
    let mut chosen: Vec<&Literal> = Vec::new();
    for l in lits {
        if chosen.iter().all(|c| !may_equal(c, l)) {
            chosen.push(l);
        }
    }
    chosen.iter().map(|l| if l.is_quantified() { SymWeight::Many } else { SymWeight::One }).sum()
}

fn meets(a: &LitSet, b: &LitSet) -> bool {
    a.iter().any(|x| b.iter().any(|y| must_overlap(x, y)))
}

fn all(s: &[&LitSet]) -> LitSet {
    s.iter().flat_map(|x| x.iter().cloned()).collect()
}

/// The two schemas interfere under every pair of adapted groundings.
pub fn m_mutex(a1: &InstantaneousSchema, a2: &InstantaneousSchema, r: &Reduced) -> bool {
    let pre1 = r.left(&all(&[&a1.pre_plus, &a1.pre_minus]));
    let eff1p = r.left(&a1.eff_plus);
    let eff1m = r.left(&a1.eff_minus);
    let pre2 = r.right(&all(&[&a2.pre_plus, &a2.pre_minus]));
    let eff2p = r.right(&a2.eff_plus);
    let eff2m = r.right(&a2.eff_minus);
    let eff1 = all(&[&eff1p, &eff1m]);
    let eff2 = all(&[&eff2p, &eff2m]);
    meets(&eff1p, &eff2m) || meets(&eff2p, &eff1m) || meets(&pre1, &eff2) || meets(&pre2, &eff1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    /// Invariants of both followed by the ends of both.
    InvEnd,
    /// Starts of both followed by the invariants of both.
    StInv,
}

/// The happening of the two first fragments can never be followed by the
/// happening of the two second fragments from a state of weight at most
/// one: the second happening's conditions contradict what the first
/// establishes, or together they need two atoms of the instance.
pub fn pair_unreachable(
    kind: PairKind,
    first: (&InstantaneousSchema, &InstantaneousSchema),
    second: (&InstantaneousSchema, &InstantaneousSchema),
    classes: (&TClass, &TClass),
) -> bool {
    let Some(m) = class_matching(classes.0, classes.1) else {
        return true;
    };
    let r = Reduced::new(&m);
    let (f1, f2) = first;
    let (s1, s2) = second;
    let g1p = r.left(&f1.gamma_plus());
    let g1m = r.left(&f1.gamma_minus());
    let g2p = r.right(&f2.gamma_plus());
    let g2m = r.right(&f2.gamma_minus());
    let established_true = all(&[&g1p, &g2p]);
    let established_false = all(&[&g1m, &g2m]);
    let needed_true = all(&[&r.left(&s1.pre_plus), &r.right(&s2.pre_plus)]);
    let needed_false = all(&[&r.left(&s1.pre_minus), &r.right(&s2.pre_minus)]);
    if meets(&established_true, &needed_false) || meets(&established_false, &needed_true) {
        return true;
    }
    let (c1, c2) = classes;
    let pf1 = r.left(&c1.restrict(&f1.pre_plus));
    let pf2 = r.right(&c2.restrict(&f2.pre_plus));
    let ps1 = r.left(&c1.restrict(&s1.pre_plus));
    let ps2 = r.right(&c2.restrict(&s2.pre_plus));
    let needed: LitSet = match kind {
        PairKind::InvEnd => pf1.iter().chain(&ps1).chain(&pf2).chain(&ps2).cloned().collect(),
        PairKind::StInv => {
            let added = all(&[&r.left(&c1.restrict(&f1.eff_plus)), &r.right(&c2.restrict(&f2.eff_plus))]);
            let later = ps1.iter().chain(&ps2).filter(|l| added.iter().all(|a| !may_equal(a, l)));
            pf1.iter().chain(&pf2).chain(later).cloned().collect()
        }
    };
    weight_lower(&needed).ge_two()
}

/// Can `a` and `b` denote the same atom under some groundings? Variables
/// unify freely, constants must agree.
pub fn unifiable(a: &Literal, b: &Literal) -> bool {
    a.rel == b.rel
        && a.args.len() == b.args.len()
        && a.args.iter().zip(&b.args).all(|(x, y)| match (x, y) {
            (Arg::Const(p), Arg::Const(q)) => p == q,
            _ => true,
        })
}

/// Weight of the preconditions the second schema needs on top of what the
/// first adds, together with the first's preconditions.
pub fn sequence_weight_lower(a1: &InstantaneousSchema, l1: &TClass, a2: &InstantaneousSchema, l2: &TClass, r: &Reduced) -> SymWeight {
    let p1 = r.left(&l1.restrict(&a1.pre_plus));
    let e1 = r.left(&l1.restrict(&a1.eff_plus));
    let p2 = r.right(&l2.restrict(&a2.pre_plus));
    let rest = p2.iter().filter(|l| e1.iter().all(|e| !may_equal(e, l)));
    let v: Vec<&Literal> = p1.iter().chain(rest).collect();
    weight_lower(v)
}

/// Literals of `a` and `b` that coincide under every adapted grounding.
pub fn common<'a>(a: &'a LitSet, b: &'a LitSet) -> impl Iterator<Item = (&'a Literal, &'a Literal)> + 'a {
    a.iter().flat_map(move |x| b.iter().filter(move |y| must_overlap(x, y)).map(move |y| (x, y)))
}
