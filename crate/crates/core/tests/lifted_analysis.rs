mod common;

use common::{domain, DEPOT, FLOORTILE};
use tempinv_core::canon::{Arg, CanonicalDomain, DurativeSchema, LitSet, Literal};
use tempinv_core::lifted::{
    check_invariance, class_matching, classify_pure, make_aux, must_overlap, simply_safe_type, subsumes, t_classes, weight, weight_lower,
    Analysis, Classification, Proof, RelevantKind, SafeType, TClass, Verdict,
};
use tempinv_core::template::{SymWeight, Template};

fn lit(rel: &str, args: &[&str]) -> Literal {
    Literal::parse_simple(rel, args)
}

fn dur<'a>(d: &'a CanonicalDomain, name: &str) -> &'a DurativeSchema {
    d.dur_schemas.iter().find(|s| s.name == name).unwrap()
}

/// The class of `s` whose signature is the schema parameter at `param`.
fn class_at(s: &DurativeSchema, t: &Template, param: usize) -> TClass {
    let v = Arg::Var(s.params[param].clone());
    t_classes(s.literals(), t).into_iter().find(|c| c.signature == [v.clone()]).expect("class present")
}

const T_FT: &str = "{clear 0, painted 0 [1], robot-at 1 [0]}";

#[test]
fn symbolic_weight_of_literal_sets() {
    let s: LitSet = [lit("p", &["?x"]), lit("q", &["?y"])].into();
    assert_eq!(weight(&s), SymWeight::Many);
    let s: LitSet = [lit("q", &["*"])].into();
    assert_eq!(weight(&s), SymWeight::Many);
    assert_eq!(weight(&LitSet::new()), SymWeight::Zero);
    assert_eq!(weight(&[lit("p", &["?x"])].into()), SymWeight::One);
}

#[test]
fn overlap_and_subsumption() {
    assert!(must_overlap(&lit("p", &["?x", "*"]), &lit("p", &["*", "?y"])));
    assert!(!must_overlap(&lit("p", &["?x"]), &lit("p", &["?y"])));
    assert!(subsumes(&lit("p", &["*"]), &lit("p", &["?x"])));
    assert!(!subsumes(&lit("p", &["?x"]), &lit("p", &["*"])));
    // Groundings are injective, so distinct variables give distinct atoms.
    assert_eq!(weight_lower([&lit("p", &["?x"]), &lit("p", &["?y"])]), SymWeight::Many);
    assert_eq!(weight_lower([&lit("p", &["?x"]), &lit("p", &["*"])]), SymWeight::One);
    assert_eq!(weight_lower([&lit("p", &["?x"]), &lit("q", &["?y"])]), SymWeight::Many);
}

#[test]
fn paint_up_classes_under_the_tile_template() {
    let d = domain(FLOORTILE).domain;
    let t = Template::parse(T_FT).unwrap();
    let s = dur(&d, "paint-up");
    // Parameters r y x c: y is the painted tile, x the robot's tile.
    let y = class_at(s, &t, 1);
    let x = class_at(s, &t, 2);
    assert_eq!(y.literals().len(), 2);
    assert_eq!(classify_pure(&s.st, &y, &t), Classification::Irrelevant);
    assert_eq!(classify_pure(&s.end, &y, &t), Classification::Relevant(RelevantKind::Unbounded));
    assert_eq!(classify_pure(&s.st, &x, &t), Classification::Irrelevant);
    let aux = make_aux(s);
    assert_eq!(classify_pure(&aux.st_star, &y, &t), Classification::Irrelevant);
    assert_eq!(classify_pure(&aux.end_star, &y, &t), Classification::Relevant(RelevantKind::Unbounded));
    assert_eq!(simply_safe_type(s, &aux, &y, &t), Some(SafeType::A));
}

#[test]
fn moving_is_simply_safe_for_the_robot_template() {
    let d = domain(FLOORTILE).domain;
    let t = Template::parse("{robot-at 0 [1]}").unwrap();
    let s = dur(&d, "up");
    let r = class_at(s, &t, 0);
    let aux = make_aux(s);
    // The start deletes the old position, the end adds the new one.
    assert_eq!(classify_pure(&s.st, &r, &t), Classification::Irrelevant);
    assert_eq!(classify_pure(&s.end, &r, &t), Classification::Relevant(RelevantKind::Unbounded));
    assert_eq!(simply_safe_type(s, &aux, &r, &t), Some(SafeType::A));
}

#[test]
fn proofs_for_accepted_templates() {
    let ft = domain(FLOORTILE).domain;
    assert_eq!(check_invariance(&Template::parse(T_FT).unwrap(), &ft), Verdict::Invariant(Proof::ByCorTypeA));
    let dp = domain(DEPOT).domain;
    let t = Template::parse("{available 0, lifting 0 [1]}").unwrap();
    assert_eq!(check_invariance(&t, &dp), Verdict::Invariant(Proof::ByCorStarSafety));
}

#[test]
fn unbounded_ends_block_the_tile_occupancy_template() {
    let d = domain(FLOORTILE).domain;
    let t = Template::parse("{robot-at 1 [0]}").unwrap();
    let Verdict::Unknown(f) = check_invariance(&t, &d) else { panic!("expected rejection") };
    let names: Vec<&str> = f.iter().map(|x| x.schema_name.as_str()).collect();
    assert_eq!(names, ["up@end", "down@end", "right@end", "left@end"]);
    assert!(f.iter().all(|x| x.classification.is_relevant_unbounded()));
}

#[test]
fn crate_location_template_is_not_proved_in_depot() {
    // Two drives of the same truck cannot be separated into the same-origin
    // and different-origin cases at the lifted level.
    let d = domain(DEPOT).domain;
    let t = Template::parse("{at 0 [1], in 0 [1], lifting 1 [0]}").unwrap();
    assert!(!check_invariance(&t, &d).is_invariant());
}

#[test]
fn matching_needs_injective_signatures() {
    let t = Template::parse("{p 0 1}").unwrap();
    let c = |a: &str, b: &str| t_classes([&lit("p", &[a, b])], &t).remove(0);
    assert!(class_matching(&c("?x", "?y"), &c("?u", "?v")).is_some());
    assert!(class_matching(&c("?x", "?x"), &c("?u", "?v")).is_none());
}

#[test]
fn analysis_records_its_steps() {
    let d = domain(FLOORTILE).domain;
    let t = Template::parse(T_FT).unwrap();
    let mut a = Analysis::new(&t, &d);
    assert_eq!(a.decide(), Verdict::Invariant(Proof::ByCorTypeA));
    assert!(a.trace().iter().any(|l| l.contains("ByCorTypeA")));
    assert!(a.describe().iter().any(|l| l.starts_with("paint-up ")));
}
