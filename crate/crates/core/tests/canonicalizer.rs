mod common;

use std::collections::BTreeSet;

use common::{domain, fixture, problem, DEPOT, FLOORTILE, MINI_DEPOT};
use tempinv_core::canon::{
    self, canonicalize, illegal_durative, parse_canonical, render, Arg, CanonError, CanonicalDomain, DurativeSchema, GroundAtom, LitSet,
    Literal,
};
use tempinv_core::pddl::parse_domain;

fn dur<'a>(d: &'a CanonicalDomain, name: &str) -> &'a DurativeSchema {
    d.dur_schemas.iter().find(|s| s.name == name).unwrap_or_else(|| panic!("no schema {name}"))
}

/// Literals over the schema's parameters, named by position.
fn lits(params: &[String], spec: &[(&str, &[usize])]) -> LitSet {
    spec.iter().map(|(rel, idx)| Literal::new(rel, idx.iter().map(|&i| Arg::Var(params[i].clone())).collect())).collect()
}

fn modifiable(s: &LitSet, d: &CanonicalDomain) -> LitSet {
    s.iter().filter(|l| d.is_modifiable(&l.rel)).cloned().collect()
}

#[test]
fn paint_up_splits_into_three_fragments() {
    let d = domain(FLOORTILE).domain;
    let s = dur(&d, "paint-up");
    let p = &s.params;
    // Parameters in declaration order: r y x c.
    assert_eq!(modifiable(&s.st.pre_plus, &d), lits(p, &[("robot-at", &[0, 2]), ("clear", &[1])]));
    assert_eq!(s.st.eff_minus, lits(p, &[("clear", &[1])]));
    assert!(s.st.eff_plus.is_empty() && s.st.pre_minus.is_empty());
    assert_eq!(s.inv.pre_plus, lits(p, &[("robot-has", &[0, 3]), ("up", &[1, 2])]));
    assert!(s.inv.eff_plus.is_empty() && s.inv.eff_minus.is_empty());
    assert_eq!(s.end.eff_plus, lits(p, &[("painted", &[1, 3])]));
    assert!(s.end.pre_plus.is_empty() && s.end.eff_minus.is_empty());
    assert_eq!(s.st.name, "paint-up@st");
    assert_eq!(s.end.name, "paint-up@end");
}

#[test]
fn typed_parameters_become_static_preconditions_of_the_start() {
    let d = domain(FLOORTILE).domain;
    let s = dur(&d, "paint-up");
    let types: BTreeSet<&str> = s.st.pre_plus.iter().filter(|l| l.rel.starts_with("is-")).map(|l| l.rel.as_str()).collect();
    assert_eq!(types, BTreeSet::from(["is-color", "is-robot", "is-tile"]));
    assert!(d.static_relations.contains(&canon::type_relation("tile")));
}

#[test]
fn depot_lift_fragments() {
    let d = domain(DEPOT).domain;
    let s = dur(&d, "lift");
    let p = &s.params;
    // Parameters: x hoist, y crate, z surface, p place.
    assert_eq!(modifiable(&s.st.pre_plus, &d), lits(p, &[("available", &[0]), ("at", &[1, 3]), ("on", &[1, 2]), ("clear", &[1])]));
    assert_eq!(s.st.eff_plus, lits(p, &[("lifting", &[0, 1]), ("clear", &[2])]));
    assert_eq!(s.st.eff_minus, lits(p, &[("at", &[1, 3]), ("clear", &[1]), ("available", &[0]), ("on", &[1, 2])]));
    assert_eq!(s.inv.pre_plus, lits(p, &[("at", &[0, 3])]));
    assert!(s.end.literals().next().is_none());
}

#[test]
fn modifiable_relations_are_those_with_effects() {
    let names = |d: &CanonicalDomain| d.modifiable_relations().into_iter().map(|(r, _)| r.to_string()).collect::<BTreeSet<_>>();
    let ft = domain(FLOORTILE).domain;
    assert_eq!(names(&ft), ["clear", "painted", "robot-at", "robot-has"].map(String::from).into());
    let dp = domain(DEPOT).domain;
    assert_eq!(names(&dp), ["at", "available", "clear", "in", "lifting", "on"].map(String::from).into());
}

#[test]
fn rendered_form_parses_back() {
    for name in [FLOORTILE, DEPOT] {
        let d = domain(name).domain;
        assert_eq!(parse_canonical(&render(&d)).unwrap(), d, "{name}");
    }
}

#[test]
fn objects_get_type_atoms_for_all_ancestors() {
    let d = domain(DEPOT);
    let p = problem(&d, MINI_DEPOT);
    for t in ["crate", "surface", "locatable", "object"] {
        assert!(p.init.contains(&GroundAtom::new(&canon::type_relation(t), &["crate0"])), "{t}");
    }
    assert!(!p.init.contains(&GroundAtom::new("is-place", &["crate0"])));
    assert!(p.init.contains(&GroundAtom::new("on", &["crate1", "crate0"])));
}

fn canon_of(text: &str) -> Result<CanonicalDomain, CanonError> {
    canonicalize(&parse_domain(text).unwrap())
}

#[test]
fn invariant_condition_deleted_at_start_is_illegal() {
    let text = "(define (domain d) (:predicates (p))
      (:durative-action a :parameters () :duration (= ?duration 1)
        :condition (over all (p))
        :effect (at start (not (p)))))";
    match canon_of(text) {
        Err(CanonError::IllegalDurative { schema, condition, .. }) => {
            assert_eq!(schema, "a");
            assert_eq!(condition, 2);
        }
        other => panic!("expected illegal durative, got {other:?}"),
    }
}

#[test]
fn illegal_durative_accepts_the_fixture_schemas() {
    for name in [FLOORTILE, DEPOT] {
        let d = domain(name).domain;
        for s in &d.dur_schemas {
            assert_eq!(illegal_durative(&s.st, &s.inv, &s.end), None, "{}", s.name);
        }
    }
}

#[test]
fn universal_effects_keep_a_quantified_position() {
    let text = "(define (domain d) (:predicates (p ?x ?y) (q ?x))
      (:action a :parameters (?x) :precondition (q ?x)
        :effect (forall (?y) (not (p ?x ?y)))))";
    let d = canon_of(text).unwrap();
    let a = &d.inst_schemas[0];
    let l = a.eff_minus.iter().next().unwrap();
    assert_eq!(l.rel, "p");
    assert!(matches!(l.args[0], Arg::Var(_)));
    assert!(l.args[1].is_quant());
}

#[test]
fn disjunctive_preconditions_are_unsupported() {
    let text = "(define (domain d) (:predicates (p) (q))
      (:action a :parameters () :precondition (or (p) (q)) :effect (p)))";
    assert!(matches!(canon_of(text), Err(CanonError::UnsupportedFeature { .. })));
}

#[test]
fn negated_conjunction_in_effects_is_rejected_with_a_position() {
    let text = "(define (domain d) (:predicates (p) (q))\n(:action a :parameters () :precondition (p)\n :effect (when (p) (q))))";
    let e = canon_of(text).unwrap_err();
    assert!(e.to_string().starts_with("3:"), "{e}");
}

#[test]
fn canonical_text_is_stable() {
    let raw = fixture(FLOORTILE);
    let a = render(&canon_of(&raw).unwrap());
    let b = render(&canon_of(&raw).unwrap());
    assert_eq!(a, b);
    assert!(a.starts_with("(canonical-domain"));
}
