#![allow(dead_code)]

use tempinv_core::canon::CanonicalProblem;
use tempinv_core::load::{load_domain, load_problem, LoadedDomain};
use tempinv_core::oracle::GroundProblem;

pub fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn domain(name: &str) -> LoadedDomain {
    load_domain(&fixture(name)).unwrap()
}

pub fn problem(d: &LoadedDomain, name: &str) -> CanonicalProblem {
    load_problem(d, &fixture(name)).unwrap()
}

pub fn grounded(dom: &str, prob: &str) -> (LoadedDomain, GroundProblem) {
    let d = domain(dom);
    let p = problem(&d, prob);
    let gp = GroundProblem::new(&d.domain, &p, false).unwrap();
    (d, gp)
}

pub const FLOORTILE: &str = "floortile.pddl";
pub const DEPOT: &str = "depot.pddl";
pub const MUTATED: &str = "floortile-mutated.pddl";
pub const MINI_FLOORTILE: &str = "mini-floortile.pddl";
pub const MINI_DEPOT: &str = "mini-depot.pddl";

pub mod checks {
    use std::collections::{BTreeMap, BTreeSet};

    use tempinv_core::canon::{Arg, CanonicalDomain, GroundAtom};
    use tempinv_core::lifted::{classify_pure, t_classes};
    use tempinv_core::oracle::{classify_ground, ground_action, AtomSet, Closure, GroundAction, GroundProblem};
    use tempinv_core::synth::{initial_templates, synthesize, Mode, Options};
    use tempinv_core::template::{instantiate, Template, TemplateInstance};

    /// Initial templates plus every template the synthesis checked.
    pub fn templates_of(d: &CanonicalDomain) -> Vec<Template> {
        let r = synthesize(d, Mode::Tis, Options::default());
        let mut out = initial_templates(d);
        out.extend(r.accepted.into_iter().map(|a| a.template));
        out.extend(r.rejected.into_iter().map(|a| a.template));
        let mut seen = BTreeSet::new();
        out.retain(|t| seen.insert(t.key().to_string()));
        out
    }

    fn injective(vars: &[String], objects: &[String]) -> Vec<BTreeMap<String, String>> {
        let mut out = Vec::new();
        fn rec(vars: &[String], objects: &[String], cur: &mut Vec<usize>, out: &mut Vec<BTreeMap<String, String>>) {
            if cur.len() == vars.len() {
                out.push(vars.iter().cloned().zip(cur.iter().map(|&i| objects[i].clone())).collect());
                return;
            }
            for i in 0..objects.len() {
                if !cur.contains(&i) {
                    cur.push(i);
                    rec(vars, objects, cur, out);
                    cur.pop();
                }
            }
        }
        rec(vars, objects, &mut Vec::new(), &mut out);
        out
    }

    /// Compares the lifted classification of every class of every schema
    /// with the ground classification of the matching instance, over all
    /// injective groundings into four objects. A pair is coherent when the
    /// ground action touches the instance only through the class. Returns
    /// the number of coherent pairs and the disagreements.
    pub fn lifted_ground_agreement(d: &CanonicalDomain, templates: &[Template]) -> (usize, Vec<String>) {
        let objects: Vec<String> = (0..4).map(|i| format!("o{i}")).collect();
        let mut checked = 0;
        let mut bad = Vec::new();
        for r in d.all_schemas() {
            let s = d.schema(r);
            let mut vars: BTreeSet<String> = s.params.iter().cloned().collect();
            vars.extend(s.literals().flat_map(|l| l.free_vars()).map(String::from));
            let vars: Vec<String> = vars.into_iter().collect();
            if vars.len() > objects.len() {
                continue;
            }
            let grs = injective(&vars, &objects);
            for t in templates {
                for class in t_classes(s.literals(), t) {
                    if class.signature.iter().any(|a| !matches!(a, Arg::Var(_))) {
                        continue;
                    }
                    let lifted = classify_pure(s, &class, t);
                    let pure = class.pure(s);
                    for gr in &grs {
                        let g = TemplateInstance(class.signature.iter().map(|a| gr[a.var().unwrap()].clone()).collect());
                        let inst = instantiate(t, &g, &objects);
                        let whole = ground_action(s, gr, &objects).unwrap().restrict(&inst);
                        let own = ground_action(&pure, gr, &objects).unwrap().restrict(&inst);
                        if whole != own {
                            continue;
                        }
                        checked += 1;
                        let ground = classify_ground(&whole, &inst);
                        if ground != lifted {
                            bad.push(format!("{} {} {class} {g}: lifted {lifted}, ground {ground}", t, s.name));
                        }
                    }
                }
            }
        }
        (checked, bad)
    }

    fn apply(s: &AtomSet, a: &GroundAction) -> AtomSet {
        s.difference(&a.eff_minus).chain(&a.eff_plus).cloned().collect()
    }

    fn applicable(s: &AtomSet, a: &GroundAction) -> bool {
        a.pre_plus.is_subset(s) && a.pre_minus.is_disjoint(s)
    }

    fn interfere(a: &GroundAction, b: &GroundAction) -> bool {
        let touches = |x: &GroundAction, y: &GroundAction| {
            let pre: AtomSet = x.pre_plus.union(&x.pre_minus).cloned().collect();
            !pre.is_disjoint(&y.eff_plus) || !pre.is_disjoint(&y.eff_minus)
        };
        touches(a, b) || touches(b, a) || !a.eff_plus.is_disjoint(&b.eff_minus) || !b.eff_plus.is_disjoint(&a.eff_minus)
    }

    /// For every logical state of the closure and every pair of applicable,
    /// non-interfering ground actions (native actions and durative
    /// fragments), applying the pair jointly equals both serial orders.
    /// Returns the number of cases and the failures.
    pub fn serializability(gp: &GroundProblem, c: &Closure) -> (usize, Vec<String>) {
        let mut actions: Vec<&GroundAction> = gp.instantaneous.iter().collect();
        for d in &gp.durative {
            actions.extend([&d.st, &d.inv, &d.end]);
        }
        let states: BTreeSet<AtomSet> = c.states.iter().map(|s| gp.logical_atoms(s)).collect();
        let mut checked = 0;
        let mut bad = Vec::new();
        for s in &states {
            let live: Vec<&GroundAction> = actions.iter().copied().filter(|a| applicable(s, a)).collect();
            for (i, a) in live.iter().enumerate() {
                for b in &live[i + 1..] {
                    if interfere(a, b) {
                        continue;
                    }
                    checked += 1;
                    let mut del: AtomSet = a.eff_minus.union(&b.eff_minus).cloned().collect();
                    del = s.difference(&del).cloned().collect();
                    let joint: AtomSet = del.into_iter().chain(a.eff_plus.iter().cloned()).chain(b.eff_plus.iter().cloned()).collect();
                    let ab = apply(s, a);
                    let ba = apply(s, b);
                    let ok = applicable(&ab, b) && applicable(&ba, a) && apply(&ab, b) == joint && apply(&ba, a) == joint;
                    if !ok {
                        bad.push(format!("{} / {}", a.origin, b.origin));
                    }
                }
            }
        }
        (checked, bad)
    }

    /// Relations occurring in some effect, computed from the schemas.
    fn effect_relations(d: &CanonicalDomain) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for s in d.inst_schemas.iter().chain(d.dur_schemas.iter().flat_map(|x| [&x.st, &x.inv, &x.end])) {
            out.extend(s.eff_plus.iter().chain(&s.eff_minus).map(|l| l.rel.clone()));
        }
        out
    }

    /// Modifiable atoms of the problem counted from the ground actions and the
    /// initial state.
    pub fn count_modifiable(d: &CanonicalDomain, gp: &GroundProblem) -> BTreeSet<GroundAtom> {
        let rels = effect_relations(d);
        let mut all: BTreeSet<GroundAtom> = gp.logical_atoms(&gp.initial_state());
        for a in gp.instantaneous.iter().chain(gp.durative.iter().flat_map(|x| [&x.st, &x.inv, &x.end])) {
            all.extend(a.pre().chain(a.eff()).cloned());
        }
        all.into_iter().filter(|a| rels.contains(&a.rel)).collect()
    }
}
