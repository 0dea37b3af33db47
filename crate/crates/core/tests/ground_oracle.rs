mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use common::checks::{lifted_ground_agreement, serializability, templates_of};
use common::{domain, grounded, DEPOT, FLOORTILE, MINI_DEPOT, MINI_FLOORTILE, MUTATED};
use tempinv_core::canon::{Arg, GroundAtom, Literal};
use tempinv_core::lifted::{Classification, RelevantKind};
use tempinv_core::oracle::{
    classify_ground, ground_action, reachable_search, verify_template, AtomSet, Bounds, Event, GroundError, Inapplicable, OracleVerdict,
};
use tempinv_core::synth::{synthesize, Mode, Options};
use tempinv_core::template::{instantiate, Template, TemplateInstance};

fn atoms(list: &[(&str, &[&str])]) -> AtomSet {
    list.iter().map(|(r, a)| GroundAtom::new(r, a)).collect()
}

fn objs(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

#[test]
fn grounding_the_start_of_paint_up() {
    let d = domain(FLOORTILE).domain;
    let s = d.dur_schemas.iter().find(|s| s.name == "paint-up").unwrap();
    let names = ["rbt1", "tile2", "tile1", "black"];
    let gr: BTreeMap<String, String> = s.params.iter().cloned().zip(names.map(String::from)).collect();
    let g = ground_action(&s.st, &gr, &objs(&names)).unwrap();
    let modifiable = |a: &AtomSet| -> AtomSet { a.iter().filter(|x| d.is_modifiable(&x.rel)).cloned().collect() };
    assert_eq!(modifiable(&g.pre_plus), atoms(&[("robot-at", &["rbt1", "tile1"]), ("clear", &["tile2"])]));
    assert_eq!(g.eff_minus, atoms(&[("clear", &["tile2"])]));
    assert!(g.eff_plus.is_empty());
    assert_eq!(g.origin.to_string(), "(paint-up@st rbt1 tile2 tile1 black)");
}

#[test]
fn grounding_must_be_total_and_injective() {
    let d = domain(FLOORTILE).domain;
    let s = &d.dur_schemas[0].st;
    let o = objs(&["a", "b"]);
    let mut gr: BTreeMap<String, String> = s.params.iter().map(|p| (p.clone(), "a".to_string())).collect();
    assert!(matches!(ground_action(s, &gr, &o), Err(GroundError::NotInjective { .. })));
    let o = objs(&["a", "b", "c", "d", "e"]);
    gr = s.params.iter().cloned().zip(o.iter().cloned()).collect();
    assert!(ground_action(s, &gr, &o).is_ok());
    gr.remove(&s.params[0]);
    assert!(matches!(ground_action(s, &gr, &o), Err(GroundError::Unassigned { .. })));
}

#[test]
fn quantified_positions_sweep_all_objects() {
    let text = "(define (domain d) (:predicates (p ?x ?y) (q ?x))
      (:action a :parameters (?x) :precondition (q ?x) :effect (forall (?y) (not (p ?x ?y)))))";
    let d = tempinv_core::load::load_domain(text).unwrap().domain;
    let s = &d.inst_schemas[0];
    let gr = BTreeMap::from([(s.params[0].clone(), "a".to_string())]);
    let g = ground_action(s, &gr, &objs(&["a", "b", "c"])).unwrap();
    assert_eq!(g.eff_minus, atoms(&[("p", &["a", "a"]), ("p", &["a", "b"]), ("p", &["a", "c"])]));
}

#[test]
fn ground_classification_examples() {
    let d = domain(FLOORTILE).domain;
    let up = d.dur_schemas.iter().find(|s| s.name == "up").unwrap();
    let t = Template::parse("{robot-at 0 [1]}").unwrap();
    let o = objs(&["r", "t1", "t2"]);
    // Parameters r x y: move r from x to y.
    let gr: BTreeMap<String, String> = up.params.iter().cloned().zip(["r", "t1", "t2"].map(String::from)).collect();
    let inst = instantiate(&t, &TemplateInstance(vec!["r".into()]), &o);
    let st = ground_action(&up.st, &gr, &o).unwrap();
    let end = ground_action(&up.end, &gr, &o).unwrap();
    assert_eq!(classify_ground(&st, &inst), Classification::Irrelevant);
    assert_eq!(classify_ground(&end, &inst), Classification::Relevant(RelevantKind::Unbounded));
    let other = instantiate(&t, &TemplateInstance(vec!["t1".into()]), &o);
    assert_eq!(classify_ground(&end, &other), Classification::Irrelevant);

    let lit = |r: &str, a: &[&str]| Literal::new(r, a.iter().map(|v| Arg::Var(v.to_string())).collect());
    let mut bal = tempinv_core::canon::InstantaneousSchema::empty("b", vec!["x".into(), "y".into()]);
    bal.pre_plus.insert(lit("p", &["x"]));
    bal.eff_minus.insert(lit("p", &["x"]));
    bal.eff_plus.insert(lit("p", &["y"]));
    let gr = BTreeMap::from([("x".to_string(), "a".to_string()), ("y".to_string(), "b".to_string())]);
    let g = ground_action(&bal, &gr, &objs(&["a", "b"])).unwrap();
    let whole = atoms(&[("p", &["a"]), ("p", &["b"])]);
    assert_eq!(classify_ground(&g, &whole), Classification::Relevant(RelevantKind::Balanced));
    let mut unreachable = g.clone();
    unreachable.pre_plus = whole.clone();
    assert_eq!(classify_ground(&unreachable, &whole), Classification::Unreachable);
    let mut heavy = g.clone();
    heavy.eff_plus = whole.clone();
    assert_eq!(classify_ground(&heavy, &whole), Classification::Heavy);
}

#[test]
fn depth_zero_closure_is_the_initial_state() {
    let (_, gp) = grounded(FLOORTILE, MINI_FLOORTILE);
    let c = reachable_search(&gp, Bounds { max_depth: 0, ..Bounds::default() });
    assert_eq!(c.states, [gp.initial_state()]);
    assert!(gp.logical_atoms(&c.states[0]).contains(&GroundAtom::new("robot-at", &["rbt1", "tile1"])));
}

#[test]
fn mini_floortile_can_paint_the_middle_tile() {
    let (_, gp) = grounded(FLOORTILE, MINI_FLOORTILE);
    let c = reachable_search(&gp, Bounds::default());
    let goal = GroundAtom::new("painted", &["tile2", "black"]);
    assert!(c.states.iter().any(|s| gp.logical_atoms(s).contains(&goal)));
    assert!(!c.bound_exceeded);
}

#[test]
fn happenings_reject_interference_and_broken_invariants() {
    let (_, gp) = grounded(FLOORTILE, MINI_FLOORTILE);
    let s0 = gp.initial_state();
    assert!(matches!(gp.apply_happening(&s0, &[]), Err(Inapplicable::Malformed(_))));
    assert!(matches!(gp.apply_happening(&s0, &[Event::End(0)]), Err(Inapplicable::Malformed(_))));

    let up = gp.parse_event("start (up rbt1 tile1 tile2)").expect("move up exists");
    let paint = gp.parse_event("start (paint-up rbt1 tile2 tile1 black)").expect("paint up exists");
    // Both need tile2 clear and the move deletes it.
    assert!(!gp.compatible(up, paint));
    assert!(matches!(gp.apply_happening(&s0, &[up, paint]), Err(Inapplicable::Interference(..))));

    let s1 = gp.apply_happening(&s0, &[paint]).unwrap();
    assert_eq!(s1.open.len(), 1);
    let Event::Start(j) = paint else { unreachable!() };
    let s2 = gp.apply_happening(&s1, &[Event::End(j)]).unwrap();
    assert!(gp.logical_atoms(&s2).contains(&GroundAtom::new("painted", &["tile2", "black"])));
    assert!(s2.open.is_empty());
}

#[test]
fn invariant_conditions_are_checked_across_the_happening() {
    let (_, gp) = grounded(FLOORTILE, MINI_FLOORTILE);
    let s0 = gp.initial_state();
    let paint = gp.parse_event("start (paint-up rbt1 tile2 tile1 black)").unwrap();
    let s1 = gp.apply_happening(&s0, &[paint]).unwrap();
    // Starting the same paint again needs tile2 clear, which is gone.
    assert!(matches!(gp.apply_happening(&s1, &[paint]), Err(Inapplicable::Precondition(_))));
}

#[test]
fn accepted_templates_hold_on_the_mini_problems() {
    let started = Instant::now();
    for (dom, prob) in [(FLOORTILE, MINI_FLOORTILE), (DEPOT, MINI_DEPOT)] {
        let (d, gp) = grounded(dom, prob);
        for a in synthesize(&d.domain, Mode::Tis, Options::default()).accepted {
            let v = verify_template(&a.template, &gp, Bounds::default());
            assert!(v.holds(), "{} on {prob}: {v:?}", a.template);
        }
    }
    assert!(started.elapsed().as_secs() < 30);
}

#[test]
fn mutated_domain_has_a_short_replayable_witness() {
    let (_, gp) = grounded(MUTATED, MINI_FLOORTILE);
    let t = Template::parse("{clear 0, painted 0 [1]}").unwrap();
    let OracleVerdict::Violated { trace, atoms, .. } = verify_template(&t, &gp, Bounds::default()) else { panic!("expected a violation") };
    assert!(trace.len() <= 4);
    assert_eq!(atoms.len(), 2);
    let mut s = gp.initial_state();
    for h in &trace {
        let line = gp.format_happening(h);
        let parsed = gp.parse_happening(&line).expect("witness lines parse");
        s = gp.apply_happening(&s, &parsed).unwrap();
    }
    let end = gp.logical_atoms(&s);
    assert!(atoms.iter().all(|a| end.contains(a)));
}

#[test]
fn state_cap_makes_verification_inconclusive() {
    let (_, gp) = grounded(DEPOT, MINI_DEPOT);
    let t = Template::parse("{available 0, lifting 0 [1]}").unwrap();
    let v = verify_template(&t, &gp, Bounds { state_cap: 10, ..Bounds::default() });
    assert_eq!(v, OracleVerdict::Inconclusive { states: 10 });
}

#[test]
fn initial_state_violations_are_reported_separately() {
    let (_, gp) = grounded(DEPOT, MINI_DEPOT);
    // Two crates sit at depot0 initially.
    let t = Template::parse("{at 1 [0]}").unwrap();
    assert!(matches!(verify_template(&t, &gp, Bounds::default()), OracleVerdict::InitViolation { .. }));
}

#[test]
fn lifted_and_ground_classifications_agree() {
    for name in [FLOORTILE, DEPOT] {
        let d = domain(name).domain;
        let (n, bad) = lifted_ground_agreement(&d, &templates_of(&d));
        assert!(n > 1000, "{name}: only {n} coherent pairs");
        assert!(bad.is_empty(), "{name}: {}", bad[..bad.len().min(5)].join("\n"));
    }
}

#[test]
fn non_interfering_pairs_serialize() {
    let mut total = 0;
    for (dom, prob) in [(FLOORTILE, MINI_FLOORTILE), (DEPOT, MINI_DEPOT)] {
        let (_, gp) = grounded(dom, prob);
        let c = reachable_search(&gp, Bounds::default());
        let (n, bad) = serializability(&gp, &c);
        assert!(bad.is_empty(), "{prob}: {:?}", &bad[..bad.len().min(5)]);
        total += n;
    }
    assert!(total >= 10_000, "{total} cases");
}
