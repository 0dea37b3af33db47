//! Grounded problems, happenings under the no-moving-targets rule and
//! breadth-first exploration of timed states. Durations are abstracted
//! away: every interleaving of starts and ends is explored.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use super::ground::{ground_action_with, AtomSet, GroundAction, GroundError, Origin};
use crate::canon::{CanonicalDomain, CanonicalProblem, GroundAtom, InstantaneousSchema};
use crate::template::{enumerate_instances, instantiate, Template, TemplateInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Largest number of happenings from the initial state.
    pub max_depth: usize,
    /// Largest number of events in one happening.
    pub max_sim: usize,
    /// Exploration stops once this many states are known.
    pub state_cap: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { max_depth: 8, max_sim: 2, state_cap: 2_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundDurative {
    pub origin: Origin,
    pub st: GroundAction,
    pub inv: GroundAction,
    pub end: GroundAction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Event {
    Inst(usize),
    Start(usize),
    End(usize),
}

/// Atom sets as sorted indices into the problem's atom table.
#[derive(Debug, Clone, Default)]
struct Ids {
    pre_plus: Vec<u32>,
    pre_minus: Vec<u32>,
    eff_plus: Vec<u32>,
    eff_minus: Vec<u32>,
}

fn meet(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

impl Ids {
    fn holds(&self, s: &[u32]) -> bool {
        self.pre_plus.iter().all(|a| s.binary_search(a).is_ok()) && !meet(&self.pre_minus, s)
    }

    fn pre_meets_eff(&self, o: &Ids) -> bool {
        [&self.pre_plus, &self.pre_minus].iter().any(|p| meet(p, &o.eff_plus) || meet(p, &o.eff_minus))
    }

    /// Mutex under the no-moving-targets rule.
    fn interferes(&self, o: &Ids) -> bool {
        self.pre_meets_eff(o) || o.pre_meets_eff(self) || meet(&self.eff_plus, &o.eff_minus) || meet(&o.eff_plus, &self.eff_minus)
    }
}

/// Logical state and the multiset of durative actions currently executing,
/// both as sorted index vectors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimedState {
    pub logical: Vec<u32>,
    pub open: Vec<u32>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Inapplicable {
    #[error("malformed happening: {0}")]
    Malformed(String),
    #[error("precondition of {0} does not hold")]
    Precondition(String),
    #[error("{0} and {1} interfere")]
    Interference(String, String),
    #[error("invariant condition of {0} violated")]
    InvViolated(String),
}

/// All ground actions of a problem. Groundings whose static preconditions
/// fail in the initial state are dropped.
#[derive(Debug, Clone)]
pub struct GroundProblem {
    pub objects: Vec<String>,
    pub instantaneous: Vec<GroundAction>,
    pub durative: Vec<GroundDurative>,
    atoms: Vec<GroundAtom>,
    index: HashMap<GroundAtom, u32>,
    inst_ids: Vec<Ids>,
    dur_ids: Vec<[Ids; 3]>,
    init: Vec<u32>,
}

/// Injective (or, with `allow_repeats`, arbitrary) assignments of objects
/// to `params` passing the unary static preconditions of `s`.
fn groundings(
    s: &InstantaneousSchema,
    params: &[String],
    d: &CanonicalDomain,
    p: &CanonicalProblem,
    allow_repeats: bool,
) -> Vec<BTreeMap<String, String>> {
    let candidates: Vec<Vec<&String>> = params
        .iter()
        .map(|v| {
            p.objects
                .iter()
                .filter(|o| {
                    s.pre_plus.iter().all(|l| {
                        let unary = d.static_relations.contains(&l.rel) && l.args.len() == 1 && l.args[0].var() == Some(v.as_str());
                        !unary || p.init.contains(&GroundAtom { rel: l.rel.clone(), args: vec![(*o).clone()] })
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut cur: Vec<&String> = Vec::new();
    fn rec<'a>(
        candidates: &[Vec<&'a String>],
        params: &[String],
        allow_repeats: bool,
        cur: &mut Vec<&'a String>,
        out: &mut Vec<BTreeMap<String, String>>,
    ) {
        let Some(cs) = candidates.get(cur.len()) else {
            out.push(params.iter().cloned().zip(cur.iter().map(|o| (*o).clone())).collect());
            return;
        };
        for o in cs {
            if allow_repeats || !cur.contains(o) {
                cur.push(o);
                rec(candidates, params, allow_repeats, cur, out);
                cur.pop();
            }
        }
    }
    rec(&candidates, params, allow_repeats, &mut cur, &mut out);
    out
}

fn statics_hold(a: &GroundAction, d: &CanonicalDomain, init: &AtomSet) -> bool {
    let is_static = |g: &&GroundAtom| d.static_relations.contains(&g.rel);
    a.pre_plus.iter().filter(is_static).all(|g| init.contains(g)) && !a.pre_minus.iter().filter(is_static).any(|g| init.contains(g))
}

impl GroundProblem {
    pub fn new(d: &CanonicalDomain, p: &CanonicalProblem, allow_repeats: bool) -> Result<Self, GroundError> {
        let objects = p.objects.clone();
        let mut instantaneous = Vec::new();
        for s in &d.inst_schemas {
            for gr in groundings(s, &s.params, d, p, allow_repeats) {
                let a = ground_action_with(s, &gr, &objects, allow_repeats)?;
                if statics_hold(&a, d, &p.init) {
                    instantaneous.push(a);
                }
            }
        }
        let mut durative = Vec::new();
        for s in &d.dur_schemas {
            for gr in groundings(&s.st, &s.params, d, p, allow_repeats) {
                let st = ground_action_with(&s.st, &gr, &objects, allow_repeats)?;
                if !statics_hold(&st, d, &p.init) {
                    continue;
                }
                durative.push(GroundDurative {
                    origin: Origin { schema: s.name.clone(), grounding: s.params.iter().map(|v| (v.clone(), gr[v].clone())).collect() },
                    st,
                    inv: ground_action_with(&s.inv, &gr, &objects, allow_repeats)?,
                    end: ground_action_with(&s.end, &gr, &objects, allow_repeats)?,
                });
            }
        }
        let mut gp = GroundProblem {
            objects,
            instantaneous,
            durative,
            atoms: Vec::new(),
            index: HashMap::new(),
            inst_ids: Vec::new(),
            dur_ids: Vec::new(),
            init: Vec::new(),
        };
        gp.init = gp.intern_set(&p.init);
        let inst: Vec<Ids> = gp.instantaneous.clone().iter().map(|a| gp.intern_action(a)).collect();
        let dur: Vec<[Ids; 3]> =
            gp.durative.clone().iter().map(|a| [gp.intern_action(&a.st), gp.intern_action(&a.inv), gp.intern_action(&a.end)]).collect();
        gp.inst_ids = inst;
        gp.dur_ids = dur;
        Ok(gp)
    }

    fn intern(&mut self, a: &GroundAtom) -> u32 {
        if let Some(&i) = self.index.get(a) {
            return i;
        }
        let i = self.atoms.len() as u32;
        self.atoms.push(a.clone());
        self.index.insert(a.clone(), i);
        i
    }

    fn intern_set(&mut self, s: &AtomSet) -> Vec<u32> {
        let mut v: Vec<u32> = s.iter().map(|a| self.intern(a)).collect();
        v.sort_unstable();
        v
    }

    fn intern_action(&mut self, a: &GroundAction) -> Ids {
        Ids {
            pre_plus: self.intern_set(&a.pre_plus),
            pre_minus: self.intern_set(&a.pre_minus),
            eff_plus: self.intern_set(&a.eff_plus),
            eff_minus: self.intern_set(&a.eff_minus),
        }
    }

    /// Index of an atom that occurs in the initial state or in some ground
    /// action. Other atoms are never true.
    pub fn atom_id(&self, a: &GroundAtom) -> Option<u32> {
        self.index.get(a).copied()
    }

    pub fn atom(&self, id: u32) -> &GroundAtom {
        &self.atoms[id as usize]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn initial_state(&self) -> TimedState {
        TimedState { logical: self.init.clone(), open: Vec::new() }
    }

    pub fn logical_atoms(&self, s: &TimedState) -> AtomSet {
        s.logical.iter().map(|&i| self.atom(i).clone()).collect()
    }

    /// The ground action an event executes.
    pub fn action(&self, e: Event) -> &GroundAction {
        match e {
            Event::Inst(i) => &self.instantaneous[i],
            Event::Start(j) => &self.durative[j].st,
            Event::End(j) => &self.durative[j].end,
        }
    }

    fn ids(&self, e: Event) -> &Ids {
        match e {
            Event::Inst(i) => &self.inst_ids[i],
            Event::Start(j) => &self.dur_ids[j][0],
            Event::End(j) => &self.dur_ids[j][2],
        }
    }

    pub fn event_name(&self, e: Event) -> String {
        match e {
            Event::Inst(i) => self.instantaneous[i].origin.to_string(),
            Event::Start(j) => format!("start {}", self.durative[j].origin),
            Event::End(j) => format!("end {}", self.durative[j].origin),
        }
    }

    /// Parses an event written by [`GroundProblem::event_name`].
    pub fn parse_event(&self, text: &str) -> Option<Event> {
        let text = text.trim();
        let find = |s: &str| self.durative.iter().position(|d| d.origin.to_string() == s);
        if let Some(rest) = text.strip_prefix("start ") {
            return find(rest).map(Event::Start);
        }
        if let Some(rest) = text.strip_prefix("end ") {
            return find(rest).map(Event::End);
        }
        self.instantaneous.iter().position(|a| a.origin.to_string() == text).map(Event::Inst)
    }

    /// One happening as a line: events separated by `; `.
    pub fn format_happening(&self, h: &[Event]) -> String {
        h.iter().map(|&e| self.event_name(e)).collect::<Vec<_>>().join("; ")
    }

    pub fn parse_happening(&self, line: &str) -> Option<Vec<Event>> {
        line.split(';').map(|e| self.parse_event(e)).collect()
    }

    fn inv_name(&self, j: u32) -> String {
        format!("{}", self.durative[j as usize].origin)
    }

    /// Applies a set of simultaneous events: instantaneous actions, starts,
    /// and ends of open durative actions. Events, together with the
    /// invariant conditions of actions open across the happening, must be
    /// pairwise non-interfering; invariant conditions must hold before and
    /// after.
    pub fn apply_happening(&self, s: &TimedState, h: &[Event]) -> Result<TimedState, Inapplicable> {
        if h.is_empty() {
            return Err(Inapplicable::Malformed("empty happening".into()));
        }
        let mut across = s.open.clone();
        let mut started = Vec::new();
        for (i, &e) in h.iter().enumerate() {
            if h[..i].contains(&e) {
                return Err(Inapplicable::Malformed(format!("{} occurs twice", self.event_name(e))));
            }
            match e {
                Event::End(j) => match across.iter().position(|&o| o as usize == j) {
                    Some(p) => {
                        across.remove(p);
                    }
                    None => return Err(Inapplicable::Malformed(format!("{} is not executing", self.event_name(e)))),
                },
                Event::Start(j) => started.push(j as u32),
                Event::Inst(_) => {}
            }
        }
        for &j in &s.open {
            if !self.dur_ids[j as usize][1].holds(&s.logical) {
                return Err(Inapplicable::InvViolated(self.inv_name(j)));
            }
        }
        for &e in h {
            if !self.ids(e).holds(&s.logical) {
                return Err(Inapplicable::Precondition(self.event_name(e)));
            }
        }
        for (i, &a) in h.iter().enumerate() {
            for &b in &h[i + 1..] {
                if self.ids(a).interferes(self.ids(b)) {
                    return Err(Inapplicable::Interference(self.event_name(a), self.event_name(b)));
                }
            }
            for &j in &across {
                if self.ids(a).interferes(&self.dur_ids[j as usize][1]) {
                    return Err(Inapplicable::Interference(self.event_name(a), format!("invariant of {}", self.inv_name(j))));
                }
            }
        }
        let mut logical: BTreeSet<u32> = s.logical.iter().copied().collect();
        for &e in h {
            for a in &self.ids(e).eff_minus {
                logical.remove(a);
            }
        }
        for &e in h {
            logical.extend(&self.ids(e).eff_plus);
        }
        let logical: Vec<u32> = logical.into_iter().collect();
        let mut open = across;
        open.extend(started);
        open.sort_unstable();
        for &j in &open {
            if !self.dur_ids[j as usize][1].holds(&logical) {
                return Err(Inapplicable::InvViolated(self.inv_name(j)));
            }
        }
        Ok(TimedState { logical, open })
    }

    /// Events whose own preconditions hold in `s`: ends of open actions
    /// first, then instantaneous actions, then starts.
    pub fn enabled_events(&self, s: &TimedState) -> Vec<Event> {
        let mut open = s.open.clone();
        open.dedup();
        let mut out: Vec<Event> = open.into_iter().map(|j| Event::End(j as usize)).collect();
        out.extend((0..self.instantaneous.len()).map(Event::Inst));
        out.extend((0..self.durative.len()).map(Event::Start));
        out.retain(|&e| self.ids(e).holds(&s.logical));
        out
    }

    /// Events pairwise non-interfering.
    pub fn compatible(&self, a: Event, b: Event) -> bool {
        !self.ids(a).interferes(self.ids(b))
    }

    /// Every applicable happening of at most `max_sim` events, with its
    /// successor, in lexicographic order of enabled events.
    pub fn successors(&self, s: &TimedState, max_sim: usize) -> Vec<(Vec<Event>, TimedState)> {
        let events = self.enabled_events(s);
        let mut out = Vec::new();
        let mut cur: Vec<Event> = Vec::new();
        self.extend_happenings(s, &events, 0, max_sim, &mut cur, &mut out);
        out
    }

    fn extend_happenings(
        &self,
        s: &TimedState,
        events: &[Event],
        from: usize,
        max_sim: usize,
        cur: &mut Vec<Event>,
        out: &mut Vec<(Vec<Event>, TimedState)>,
    ) {
        for i in from..events.len() {
            let e = events[i];
            if cur.iter().any(|&c| !self.compatible(c, e)) {
                continue;
            }
            cur.push(e);
            if let Ok(next) = self.apply_happening(s, cur) {
                out.push((cur.clone(), next));
            }
            if cur.len() < max_sim {
                self.extend_happenings(s, events, i + 1, max_sim, cur, out);
            }
            cur.pop();
        }
    }

    /// Atoms of a template instance that occur in this problem.
    pub fn instance_ids(&self, t: &Template, g: &TemplateInstance) -> Vec<u32> {
        let mut v: Vec<u32> = instantiate(t, g, &self.objects).iter().filter_map(|a| self.atom_id(a)).collect();
        v.sort_unstable();
        v
    }
}

/// Breadth-first closure of timed states.
#[derive(Debug, Clone)]
pub struct Closure {
    pub states: Vec<TimedState>,
    /// For each state but the first: the predecessor and the happening.
    pub parents: Vec<Option<(usize, Vec<Event>)>>,
    pub depths: Vec<usize>,
    /// The state cap was reached; the closure is partial.
    pub bound_exceeded: bool,
}

impl Closure {
    /// Happenings leading from the initial state to state `i`.
    pub fn trace(&self, mut i: usize) -> Vec<Vec<Event>> {
        let mut out = Vec::new();
        while let Some((p, h)) = &self.parents[i] {
            out.push(h.clone());
            i = *p;
        }
        out.reverse();
        out
    }
}

/// Explores timed states from the initial state. `stop` is consulted on
/// every new state; exploration ends at the first state it accepts, whose
/// index is returned.
pub fn explore(gp: &GroundProblem, bounds: Bounds, mut stop: impl FnMut(&TimedState) -> bool) -> (Closure, Option<usize>) {
    let init = gp.initial_state();
    let mut seen: HashMap<TimedState, usize> = HashMap::new();
    seen.insert(init.clone(), 0);
    let mut c = Closure { states: vec![init], parents: vec![None], depths: vec![0], bound_exceeded: false };
    if stop(&c.states[0]) {
        return (c, Some(0));
    }
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        if c.depths[i] >= bounds.max_depth {
            continue;
        }
        let s = c.states[i].clone();
        for (h, next) in gp.successors(&s, bounds.max_sim) {
            if seen.contains_key(&next) {
                continue;
            }
            if c.states.len() >= bounds.state_cap {
                c.bound_exceeded = true;
                return (c, None);
            }
            let id = c.states.len();
            seen.insert(next.clone(), id);
            c.states.push(next);
            c.parents.push(Some((i, h)));
            c.depths.push(c.depths[i] + 1);
            if stop(&c.states[id]) {
                return (c, Some(id));
            }
            queue.push_back(id);
        }
    }
    (c, None)
}

/// The full closure up to the bounds.
pub fn reachable_search(gp: &GroundProblem, bounds: Bounds) -> Closure {
    explore(gp, bounds, |_| false).0
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    /// No explored state gives any instance weight two or more.
    Holds { states: usize, depth: usize },
    /// An executable-reachable state where `instance` has weight two or
    /// more, with the happenings reaching it.
    Violated { trace: Vec<Vec<Event>>, instance: TemplateInstance, atoms: Vec<GroundAtom> },
    /// The state cap was hit before a violation was found.
    Inconclusive { states: usize },
    /// The initial state already gives `instance` weight two or more.
    InitViolation { instance: TemplateInstance, atoms: Vec<GroundAtom> },
}

impl OracleVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, OracleVerdict::Holds { .. })
    }
}

/// Instances of a template over a problem, indexed by atom for fast weight
/// computation.
struct InstanceIndex {
    instances: Vec<TemplateInstance>,
    by_atom: HashMap<u32, Vec<usize>>,
}

impl InstanceIndex {
    fn new(t: &Template, gp: &GroundProblem) -> Self {
        let instances = enumerate_instances(t, &gp.objects);
        let mut by_atom: HashMap<u32, Vec<usize>> = HashMap::new();
        for (k, g) in instances.iter().enumerate() {
            for a in gp.instance_ids(t, g) {
                by_atom.entry(a).or_default().push(k);
            }
        }
        InstanceIndex { instances, by_atom }
    }

    /// First instance with weight two or more in `s`.
    fn heavy(&self, s: &[u32]) -> Option<usize> {
        let mut counts: HashMap<usize, u8> = HashMap::new();
        for a in s {
            for &k in self.by_atom.get(a).map(Vec::as_slice).unwrap_or(&[]) {
                let c = counts.entry(k).or_insert(0);
                *c += 1;
                if *c >= 2 {
                    return Some(k);
                }
            }
        }
        None
    }
}

/// Checks a template on every explored state of a problem.
pub fn verify_template(t: &Template, gp: &GroundProblem, bounds: Bounds) -> OracleVerdict {
    let idx = InstanceIndex::new(t, gp);
    let atoms_in = |k: usize, s: &TimedState| -> Vec<GroundAtom> {
        let ids = gp.instance_ids(t, &idx.instances[k]);
        s.logical.iter().filter(|a| ids.binary_search(a).is_ok()).map(|&a| gp.atom(a).clone()).collect()
    };
    let init = gp.initial_state();
    if let Some(k) = idx.heavy(&init.logical) {
        return OracleVerdict::InitViolation { instance: idx.instances[k].clone(), atoms: atoms_in(k, &init) };
    }
    let mut hit = None;
    let (c, found) = explore(gp, bounds, |s| {
        hit = idx.heavy(&s.logical);
        hit.is_some()
    });
    match (found, hit) {
        (Some(i), Some(k)) => {
            OracleVerdict::Violated { trace: c.trace(i), instance: idx.instances[k].clone(), atoms: atoms_in(k, &c.states[i]) }
        }
        _ if c.bound_exceeded => OracleVerdict::Inconclusive { states: c.states.len() },
        _ => OracleVerdict::Holds { states: c.states.len(), depth: c.depths.iter().copied().max().unwrap_or(0) },
    }
}
