//! Structured parsing of domain and problem s-expressions.

use std::collections::{BTreeSet, HashSet};

use log::warn;

use super::ast::*;
use super::sexpr::{read_all, Pos, SExpr};
use super::ParseError;

const HONORED_REQUIREMENTS: &[&str] = &[":typing", ":durative-actions", ":strips"];

fn err<T>(pos: Pos, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError::new(pos, msg))
}

fn expect_list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr], ParseError> {
    e.as_list().ok_or_else(|| ParseError::new(e.pos(), format!("expected {what}")))
}

fn expect_atom<'a>(e: &'a SExpr, what: &str) -> Result<&'a str, ParseError> {
    e.as_atom().ok_or_else(|| ParseError::new(e.pos(), format!("expected {what}")))
}

fn expect_name<'a>(e: &'a SExpr, what: &str) -> Result<&'a str, ParseError> {
    let s = expect_atom(e, what)?;
    if s.starts_with('?') || s.starts_with(':') || s == "-" {
        return err(e.pos(), format!("expected {what}, found '{s}'"));
    }
    Ok(s)
}

/// Parses `a b - t c - u d` style lists. Variables must start with `?` when
/// `vars` is set.
fn typed_list(items: &[SExpr], vars: bool) -> Result<Vec<TypedName>, ParseError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let it = &items[i];
        let s = expect_atom(it, "name")?;
        if s == "-" {
            let Some(ty) = items.get(i + 1) else {
                return err(it.pos(), "missing type after '-'");
            };
            if ty.head() == Some("either") {
                return err(ty.pos(), "either-types are not supported");
            }
            let ty = expect_name(ty, "type name")?;
            if pending.is_empty() {
                return err(it.pos(), "type annotation without names");
            }
            for n in pending.drain(..) {
                out.push(TypedName { name: n, ty: Some(ty.to_string()) });
            }
            i += 2;
            continue;
        }
        if vars {
            let Some(v) = s.strip_prefix('?') else {
                return err(it.pos(), format!("expected variable, found '{s}'"));
            };
            if v.is_empty() {
                return err(it.pos(), "empty variable name");
            }
            pending.push(v.to_string());
        } else {
            pending.push(expect_name(it, "name")?.to_string());
        }
        i += 1;
    }
    out.extend(pending.into_iter().map(|n| TypedName { name: n, ty: None }));
    Ok(out)
}

fn term(e: &SExpr) -> Result<Term, ParseError> {
    let s = expect_atom(e, "term")?;
    match s.strip_prefix('?') {
        Some("") => err(e.pos(), "empty variable name"),
        Some(v) => Ok(Term::Var(v.to_string())),
        None => Ok(Term::Const(expect_name(e, "term")?.to_string())),
    }
}

fn atom(items: &[SExpr], pos: Pos) -> Result<Atom, ParseError> {
    let pred = expect_name(&items[0], "predicate name")?.to_string();
    let args = items[1..].iter().map(term).collect::<Result<_, _>>()?;
    Ok(Atom { pred, args, pos })
}

/// Parses a goal-description or effect formula. `timed` allows temporal
/// annotations at any conjunct level.
fn formula(e: &SExpr, timed: bool) -> Result<Formula, ParseError> {
    let pos = e.pos();
    let items = expect_list(e, "formula")?;
    let Some(head) = items.first() else {
        return err(pos, "empty formula");
    };
    let head = expect_atom(head, "formula head")?;
    let sub = |e: &SExpr| formula(e, timed);
    let arity = |n: usize| -> Result<(), ParseError> {
        if items.len() != n + 1 {
            return err(pos, format!("'{head}' expects {n} argument(s)"));
        }
        Ok(())
    };
    Ok(match head {
        "and" => Formula::And(items[1..].iter().map(sub).collect::<Result<_, _>>()?, pos),
        "or" => Formula::Or(items[1..].iter().map(sub).collect::<Result<_, _>>()?, pos),
        "not" => {
            arity(1)?;
            Formula::Not(Box::new(sub(&items[1])?), pos)
        }
        "imply" => {
            arity(2)?;
            let a = sub(&items[1])?;
            let b = sub(&items[2])?;
            Formula::Or(vec![Formula::Not(Box::new(a), pos), b], pos)
        }
        "forall" | "exists" => {
            arity(2)?;
            let vars = typed_list(expect_list(&items[1], "variable list")?, true)?;
            let body = Box::new(sub(&items[2])?);
            if head == "forall" {
                Formula::Forall(vars, body, pos)
            } else {
                Formula::Exists(vars, body, pos)
            }
        }
        "when" => {
            arity(2)?;
            Formula::When(Box::new(sub(&items[1])?), Box::new(sub(&items[2])?), pos)
        }
        "=" => {
            arity(2)?;
            Formula::Equal(term(&items[1])?, term(&items[2])?, pos)
        }
        "at" | "over" if items.len() == 3 && matches!(items[1].as_atom(), Some("start" | "end" | "all")) => {
            let spec = match (head, items[1].as_atom()) {
                ("at", Some("start")) => TimeSpec::AtStart,
                ("at", Some("end")) => TimeSpec::AtEnd,
                ("over", Some("all")) => TimeSpec::OverAll,
                _ => return err(pos, "malformed temporal annotation"),
            };
            if !timed {
                return err(pos, format!("temporal annotation '{}' outside a durative action", spec.keyword()));
            }
            Formula::Timed(spec, Box::new(formula(&items[2], false)?), pos)
        }
        "increase" | "decrease" | "assign" | "scale-up" | "scale-down" => {
            return err(pos, format!("numeric effect '{head}' is not supported"));
        }
        _ => Formula::Atom(atom(items, pos)?),
    })
}

fn section_items(e: &SExpr) -> Result<(&str, &[SExpr]), ParseError> {
    let items = expect_list(e, "section")?;
    let Some(first) = items.first() else {
        return err(e.pos(), "empty section");
    };
    Ok((expect_atom(first, "section keyword")?, &items[1..]))
}

fn define_header<'a>(text: &str, kind: &str, out: &'a mut Vec<SExpr>) -> Result<(&'a [SExpr], String), ParseError> {
    *out = read_all(text)?;
    if out.len() != 1 {
        let pos = out.get(1).map(SExpr::pos).unwrap_or_default();
        return err(pos, "expected exactly one top-level (define ...) form");
    }
    let top = &out[0];
    let items = expect_list(top, "(define ...)")?;
    if items.first().and_then(SExpr::as_atom) != Some("define") {
        return err(top.pos(), "expected (define ...)");
    }
    let Some(name_e) = items.get(1) else {
        return err(top.pos(), format!("missing ({kind} <name>)"));
    };
    let name_l = expect_list(name_e, kind)?;
    if name_l.len() != 2 || name_l[0].as_atom() != Some(kind) {
        return err(name_e.pos(), format!("expected ({kind} <name>)"));
    }
    let name = expect_name(&name_l[1], "name")?.to_string();
    Ok((&items[2..], name))
}

/// Parses a PDDL2.1 domain.
pub fn parse_domain(text: &str) -> Result<RawDomain, ParseError> {
    let mut storage = Vec::new();
    let (sections, name) = define_header(text, "domain", &mut storage)?;
    let mut d = RawDomain { name, ..Default::default() };
    let mut seen = HashSet::new();
    for sec in sections {
        let (kw, body) = section_items(sec)?;
        let repeatable = kw == ":action" || kw == ":durative-action";
        if !repeatable && !seen.insert(kw.to_string()) {
            return err(sec.pos(), format!("duplicate section '{kw}'"));
        }
        match kw {
            ":requirements" => {
                for r in body {
                    let r = expect_atom(r, "requirement flag")?;
                    if !HONORED_REQUIREMENTS.contains(&r) {
                        warn!("requirement {r} is parsed but not honored");
                    }
                    d.requirements.push(r.to_string());
                }
            }
            ":types" => {
                for t in typed_list(body, false)? {
                    let parent = t.ty.unwrap_or_else(|| "object".to_string());
                    if t.name != "object" {
                        d.types.push((t.name, parent));
                    }
                }
            }
            ":constants" => d.constants = typed_list(body, false)?,
            ":predicates" => {
                for p in body {
                    let items = expect_list(p, "predicate declaration")?;
                    let Some(first) = items.first() else {
                        return err(p.pos(), "empty predicate declaration");
                    };
                    let name = expect_name(first, "predicate name")?.to_string();
                    if d.predicates.iter().any(|q| q.name == name) {
                        return err(p.pos(), format!("duplicate predicate '{name}'"));
                    }
                    let params = typed_list(&items[1..], true)?;
                    d.predicates.push(PredicateDecl { name, params });
                }
            }
            ":functions" => warn!("numeric functions are ignored"),
            ":action" | ":durative-action" => {
                let a = action(sec.pos(), body, kw == ":durative-action")?;
                if d.actions.iter().any(|b| b.name == a.name) {
                    return err(sec.pos(), format!("duplicate action '{}'", a.name));
                }
                d.actions.push(a);
            }
            _ => return err(sec.pos(), format!("unknown domain section '{kw}'")),
        }
    }
    check_domain(&d)?;
    Ok(d)
}

fn action(pos: Pos, body: &[SExpr], durative: bool) -> Result<RawAction, ParseError> {
    let Some(name_e) = body.first() else {
        return err(pos, "missing action name");
    };
    let name = expect_name(name_e, "action name")?.to_string();
    let mut params = Vec::new();
    let mut duration = None;
    let mut condition = None;
    let mut effect = None;
    let mut i = 1;
    while i < body.len() {
        let key = expect_atom(&body[i], "action keyword")?;
        let Some(val) = body.get(i + 1) else {
            return err(body[i].pos(), format!("missing value for '{key}'"));
        };
        match (key, durative) {
            (":parameters", _) => params = typed_list(expect_list(val, "parameter list")?, true)?,
            (":duration", true) => duration = Some(val.to_string()),
            (":precondition", false) | (":condition", true) => {
                if val.as_list().is_some_and(|l| l.is_empty()) {
                    condition = None;
                } else {
                    condition = Some(formula(val, durative)?);
                }
            }
            (":effect", _) => {
                if val.as_list().is_some_and(|l| l.is_empty()) {
                    effect = None;
                } else {
                    effect = Some(formula(val, durative)?);
                }
            }
            _ => return err(body[i].pos(), format!("unexpected '{key}' in action '{name}'")),
        }
        i += 2;
    }
    let kind = if durative {
        let Some(duration) = duration else {
            return err(pos, format!("durative action '{name}' has no :duration"));
        };
        ActionKind::Durative { duration }
    } else {
        ActionKind::Instantaneous
    };
    Ok(RawAction { name, params, kind, condition, effect, pos })
}

fn check_type(d: &RawDomain, ty: &Option<String>, pos: Pos) -> Result<(), ParseError> {
    match ty {
        Some(t) if t != "object" && d.parent_of(t).is_none() => err(pos, format!("undeclared type '{t}'")),
        _ => Ok(()),
    }
}

/// Scope, arity and type checks that need the whole domain.
fn check_domain(d: &RawDomain) -> Result<(), ParseError> {
    let top = Pos::default();
    for (t, parent) in &d.types {
        check_type(d, &Some(parent.clone()), top)?;
        if d.type_chain(t).iter().filter(|x| *x == t).count() > 1 {
            return err(top, format!("cyclic type hierarchy at '{t}'"));
        }
    }
    for c in &d.constants {
        check_type(d, &c.ty, top)?;
    }
    for p in &d.predicates {
        for v in &p.params {
            check_type(d, &v.ty, top)?;
        }
    }
    let consts: BTreeSet<&str> = d.constants.iter().map(|c| c.name.as_str()).collect();
    for a in &d.actions {
        let mut scope: Vec<String> = Vec::new();
        for v in &a.params {
            check_type(d, &v.ty, a.pos)?;
            if scope.contains(&v.name) {
                return err(a.pos, format!("duplicate parameter '?{}' in '{}'", v.name, a.name));
            }
            scope.push(v.name.clone());
        }
        for f in a.condition.iter().chain(a.effect.iter()) {
            check_formula(d, &consts, f, &mut scope, a.is_durative(), false)?;
        }
    }
    Ok(())
}

fn check_formula(
    d: &RawDomain,
    consts: &BTreeSet<&str>,
    f: &Formula,
    scope: &mut Vec<String>,
    durative: bool,
    under_time: bool,
) -> Result<(), ParseError> {
    let check_term = |t: &Term, scope: &Vec<String>, pos: Pos| -> Result<(), ParseError> {
        match t {
            Term::Var(v) if !scope.contains(v) => err(pos, format!("unbound variable '?{v}'")),
            Term::Const(c) if !consts.contains(c.as_str()) => err(pos, format!("undeclared constant '{c}'")),
            _ => Ok(()),
        }
    };
    match f {
        Formula::Atom(a) => {
            let Some(p) = d.predicate(&a.pred) else {
                return Err(ParseError::undeclared_predicate(a.pos, &a.pred));
            };
            if p.params.len() != a.args.len() {
                return err(a.pos, format!("arity mismatch: '{}' expects {} argument(s), found {}", a.pred, p.params.len(), a.args.len()));
            }
            if durative && !under_time {
                return err(a.pos, format!("'{}' lacks a temporal annotation in a durative action", a.pred));
            }
            for t in &a.args {
                check_term(t, scope, a.pos)?;
            }
            Ok(())
        }
        Formula::Equal(x, y, pos) => {
            check_term(x, scope, *pos)?;
            check_term(y, scope, *pos)
        }
        Formula::Not(g, _) => check_formula(d, consts, g, scope, durative, under_time),
        Formula::And(gs, _) | Formula::Or(gs, _) => gs.iter().try_for_each(|g| check_formula(d, consts, g, scope, durative, under_time)),
        Formula::When(c, e, _) => {
            check_formula(d, consts, c, scope, durative, under_time)?;
            check_formula(d, consts, e, scope, durative, under_time)
        }
        Formula::Forall(vs, g, pos) | Formula::Exists(vs, g, pos) => {
            let n = scope.len();
            for v in vs {
                check_type(d, &v.ty, *pos)?;
                scope.push(v.name.clone());
            }
            let r = check_formula(d, consts, g, scope, durative, under_time);
            scope.truncate(n);
            r
        }
        Formula::Timed(_, g, pos) => {
            if !durative {
                return err(*pos, "temporal annotation in an instantaneous action");
            }
            if under_time {
                return err(*pos, "nested temporal annotation");
            }
            check_formula(d, consts, g, scope, durative, true)
        }
    }
}

/// Parses a problem file. Predicate usage is checked by [`validate_problem`].
pub fn parse_problem(text: &str) -> Result<RawProblem, ParseError> {
    let mut storage = Vec::new();
    let (sections, name) = define_header(text, "problem", &mut storage)?;
    let mut p = RawProblem { name, ..Default::default() };
    let mut seen = HashSet::new();
    for sec in sections {
        let (kw, body) = section_items(sec)?;
        if !seen.insert(kw.to_string()) {
            return err(sec.pos(), format!("duplicate section '{kw}'"));
        }
        match kw {
            ":domain" => {
                let [d] = body else {
                    return err(sec.pos(), "expected (:domain <name>)");
                };
                p.domain = expect_name(d, "domain name")?.to_string();
            }
            ":requirements" => {}
            ":objects" => {
                p.objects = typed_list(body, false)?;
                let mut names = HashSet::new();
                for o in &p.objects {
                    if !names.insert(o.name.as_str()) {
                        return err(sec.pos(), format!("duplicate object '{}'", o.name));
                    }
                }
            }
            ":init" => {
                for a in body {
                    let items = expect_list(a, "ground atom")?;
                    match items.first().and_then(SExpr::as_atom) {
                        None => return err(a.pos(), "expected ground atom"),
                        Some("=") => {
                            warn!("{}: numeric initial fact ignored", a.pos());
                            continue;
                        }
                        Some("at") if items.len() == 3 && items[2].as_list().is_some() => {
                            warn!("{}: timed initial literal ignored", a.pos());
                            continue;
                        }
                        Some("not") => continue,
                        Some(_) => {}
                    }
                    let pred = expect_name(&items[0], "predicate")?.to_string();
                    let args = items[1..].iter().map(|x| expect_name(x, "object name").map(str::to_string)).collect::<Result<_, _>>()?;
                    p.init.push(GroundLiteral { pred, args, pos: a.pos() });
                }
            }
            ":goal" => p.goal = Some(formula(body.first().ok_or_else(|| ParseError::new(sec.pos(), "empty goal"))?, false)?),
            ":metric" => {}
            _ => return err(sec.pos(), format!("unknown problem section '{kw}'")),
        }
    }
    Ok(p)
}

/// Checks problem atoms and objects against the domain.
pub fn validate_problem(d: &RawDomain, p: &RawProblem) -> Result<(), ParseError> {
    for o in &p.objects {
        check_type(d, &o.ty, Pos::default())?;
    }
    let known: BTreeSet<&str> = p.objects.iter().chain(d.constants.iter()).map(|o| o.name.as_str()).collect();
    for a in &p.init {
        let Some(decl) = d.predicate(&a.pred) else {
            return Err(ParseError::undeclared_predicate(a.pos, &a.pred));
        };
        if decl.params.len() != a.args.len() {
            return err(a.pos, format!("arity mismatch: '{}' expects {} argument(s)", a.pred, decl.params.len()));
        }
        if let Some(x) = a.args.iter().find(|x| !known.contains(x.as_str())) {
            return err(a.pos, format!("unknown object '{x}'"));
        }
    }
    Ok(())
}
