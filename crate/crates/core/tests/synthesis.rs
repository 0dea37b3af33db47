mod common;

use common::{domain, DEPOT, FLOORTILE};
use tempinv_core::canon::{CanonicalDomain, SchemaRef};
use tempinv_core::lifted::{check_invariance, Proof, Verdict};
use tempinv_core::load::load_domain;
use tempinv_core::synth::{initial_templates, repair, synthesize, Mode, Options, RepairSite, SynthesisReport};
use tempinv_core::template::Template;

fn run(name: &str, mode: Mode) -> SynthesisReport {
    synthesize(&domain(name).domain, mode, Options::default())
}

fn keys(r: &SynthesisReport) -> Vec<String> {
    r.accepted.iter().map(|a| a.template.key().to_string()).collect()
}

#[test]
fn floortile_tis_finds_five_templates_two_repaired() {
    let r = run(FLOORTILE, Mode::Tis);
    assert_eq!(r.accepted.len(), 5, "{:?}", keys(&r));
    assert_eq!(r.accepted.iter().filter(|a| a.via_fix).count(), 2);
    assert_eq!(r.stats.accepted, 5);
    assert_eq!(r.stats.via_fix, 2);
}

#[test]
fn floortile_sis_finds_nothing() {
    let r = run(FLOORTILE, Mode::Sis);
    assert!(r.accepted.is_empty(), "{:?}", keys(&r));
}

#[test]
fn floortile_membership_and_proofs() {
    let r = run(FLOORTILE, Mode::Tis);
    assert!(r.contains("{robot-at 0 [1]}").is_some());
    let fix = r.contains("{clear 0, robot-at 1 [0]}").expect("robot-at and clear repair");
    assert!(fix.via_fix);
    let ft = r.contains("{clear 0, painted 0 [1], robot-at 1 [0]}").expect("tile template");
    assert!(ft.via_fix);
    assert_eq!(ft.proof, Some(Proof::ByCorTypeA));
    assert!(r.contains("{robot-at 1 [0]}").is_none());
}

#[test]
fn depot_lifting_template_by_star_safety() {
    let r = run(DEPOT, Mode::Tis);
    let a = r.contains("{available 0, lifting 0 [1]}").expect("hoist template");
    assert_eq!(a.proof, Some(Proof::ByCorStarSafety));
    assert!(a.via_fix);
}

#[test]
fn sis_accepts_carry_no_proof() {
    let text = "(define (domain d) (:predicates (p ?x) (q ?x))
      (:action a :parameters (?x) :precondition (p ?x) :effect (and (not (p ?x)) (q ?x))))";
    let d = load_domain(text).unwrap().domain;
    let r = synthesize(&d, Mode::Sis, Options::default());
    assert!(r.accepted.iter().all(|a| a.proof.is_none()));
    assert!(r.contains("{p [0]}").is_some() || r.contains("{p [0], q [0]}").is_some(), "{:?}", keys(&r));
}

fn count_for(d: &CanonicalDomain, rel: &str) -> usize {
    initial_templates(d).iter().filter(|t| t.components()[0].rel == rel).count()
}

#[test]
fn one_initial_template_per_position_plus_one() {
    let ft = domain(FLOORTILE).domain;
    assert_eq!(count_for(&ft, "robot-at"), 3);
    let text = "(define (domain d) (:predicates (r ?x ?y ?z) (s ?x))
      (:action a :parameters (?x ?y ?z) :precondition (s ?x) :effect (r ?x ?y ?z)))";
    let d = load_domain(text).unwrap().domain;
    assert_eq!(count_for(&d, "r"), 4);
    let total: usize = ft.modifiable_relations().iter().map(|(_, a)| a + 1).sum();
    assert_eq!(initial_templates(&ft).len(), total);
}

#[test]
fn report_does_not_depend_on_thread_count() {
    let d = domain(DEPOT).domain;
    let texts: Vec<String> = [1, 4]
        .into_iter()
        .map(|n| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
            let r = pool.install(|| synthesize(&d, Mode::Tis, Options::default()));
            let mut v = serde_json::to_value(&r).unwrap();
            v.as_object_mut().unwrap().remove("timing");
            v.to_string()
        })
        .collect();
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn repairing_robot_at_adds_clear() {
    let d = domain(FLOORTILE).domain;
    let t = Template::parse("{robot-at 1 [0]}").unwrap();
    let Verdict::Unknown(failures) = check_invariance(&t, &d) else { panic!("expected rejection") };
    let f = failures.iter().find(|f| f.schema_name == "up@end").expect("up@end fails");
    assert!(matches!(f.schema, SchemaRef::Frag(_, _)));
    let out = repair(&t, &RepairSite::from(f), &d, Mode::Tis, Options::default());
    let ks: Vec<&str> = out.iter().map(|t| t.key()).collect();
    assert!(ks.contains(&"{clear 0, robot-at 1 [0]}"), "{ks:?}");
}

#[test]
fn repair_respects_the_component_cap() {
    let d = domain(FLOORTILE).domain;
    let t = Template::parse("{robot-at 1 [0]}").unwrap();
    let Verdict::Unknown(failures) = check_invariance(&t, &d) else { panic!("expected rejection") };
    let capped = Options { repair_cap: 1, ..Options::default() };
    assert!(repair(&t, &RepairSite::from(&failures[0]), &d, Mode::Tis, capped).is_empty());
    let r = synthesize(&d, Mode::Tis, capped);
    assert!(r.accepted.iter().all(|a| !a.via_fix));
    assert!(r.stats.capped > 0);
}

#[test]
fn exhaustive_repair_keeps_default_results() {
    let d = domain(FLOORTILE).domain;
    let a = synthesize(&d, Mode::Tis, Options::default());
    let b = synthesize(&d, Mode::Tis, Options { repair_exhaustive: true, ..Options::default() });
    for k in keys(&a) {
        assert!(b.contains(&k).is_some(), "{k}");
    }
}

#[test]
fn singletons_are_rejected_as_trivial() {
    let r = run(FLOORTILE, Mode::Tis);
    let s = r.rejected.iter().find(|x| x.template.key() == "{clear 0}").unwrap();
    assert!(s.reason.starts_with("trivial"));
}
