//! Text form of canonical domains, as printed by `tempinv canon`. Schemas
//! keep their declaration order; the output can be read back with
//! [`parse_canonical`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use super::{Arg, CanonError, CanonicalDomain, DurativeSchema, InstantaneousSchema, LitSet, Literal};
use crate::pddl::{read_all, Pos, SExpr};

fn set(out: &mut String, indent: &str, key: &str, s: &LitSet) {
    if s.is_empty() {
        return;
    }
    let _ = write!(out, "{indent}({key}");
    for l in s {
        let _ = write!(out, " {l}");
    }
    out.push_str(")\n");
}

fn body(out: &mut String, indent: &str, s: &InstantaneousSchema) {
    set(out, indent, ":pre+", &s.pre_plus);
    set(out, indent, ":pre-", &s.pre_minus);
    set(out, indent, ":eff+", &s.eff_plus);
    set(out, indent, ":eff-", &s.eff_minus);
}

fn params(ps: &[String]) -> String {
    ps.iter().map(|p| format!("?{p}")).collect::<Vec<_>>().join(" ")
}

/// Deterministic rendering of a canonical domain.
pub fn render(d: &CanonicalDomain) -> String {
    let mut out = format!("(canonical-domain {}\n  (:relations", d.name);
    for (r, a) in &d.relations {
        let _ = write!(out, " ({r} {a})");
    }
    out.push_str(")\n  (:static");
    for r in &d.static_relations {
        let _ = write!(out, " {r}");
    }
    out.push_str(")\n  (:types");
    for chain in d.type_chains.values() {
        let _ = write!(out, " ({})", chain.join(" "));
    }
    out.push_str(")\n");
    if !d.constants.is_empty() {
        out.push_str("  (:constants");
        for (c, t) in &d.constants {
            let _ = write!(out, " ({c} {t})");
        }
        out.push_str(")\n");
    }
    for s in &d.inst_schemas {
        let _ = writeln!(out, "  (:action {}\n    (:parameters ({}))", s.name, params(&s.params));
        body(&mut out, "    ", s);
        out.push_str("  )\n");
    }
    for ds in &d.dur_schemas {
        let _ =
            writeln!(out, "  (:durative-action {}\n    (:parameters ({}))\n    (:duration {})", ds.name, params(&ds.params), ds.duration);
        for (k, s) in ds.fragments() {
            let _ = writeln!(out, "    (:{}", k.suffix());
            body(&mut out, "      ", s);
            out.push_str("    )\n");
        }
        out.push_str("  )\n");
    }
    out.push_str(")\n");
    out
}

fn bad<T>(pos: Pos, msg: impl Into<String>) -> Result<T, CanonError> {
    Err(CanonError::Invalid { pos, msg: msg.into() })
}

fn atom_str(e: &SExpr) -> Result<&str, CanonError> {
    e.as_atom().map_or_else(|| bad(e.pos(), "expected a name"), Ok)
}

fn list(e: &SExpr) -> Result<&[SExpr], CanonError> {
    e.as_list().map_or_else(|| bad(e.pos(), "expected a list"), Ok)
}

fn literal(e: &SExpr) -> Result<Literal, CanonError> {
    let items = list(e)?;
    if e.head() == Some("forall") {
        if items.len() != 3 {
            return bad(e.pos(), "malformed forall literal");
        }
        let qs: BTreeSet<&str> = list(&items[1])?.iter().map(atom_str).collect::<Result<_, _>>()?;
        let mut l = literal(&items[2])?;
        for a in &mut l.args {
            if let Arg::Var(v) = a {
                if qs.contains(format!("?{v}").as_str()) {
                    *a = Arg::Quant(v.clone());
                }
            }
        }
        return Ok(l);
    }
    let Some((head, rest)) = items.split_first() else {
        return bad(e.pos(), "empty literal");
    };
    let args = rest
        .iter()
        .map(|a| {
            let s = atom_str(a)?;
            Ok(match s.strip_prefix('?') {
                Some(v) => Arg::Var(v.to_string()),
                None => Arg::Const(s.to_string()),
            })
        })
        .collect::<Result<_, CanonError>>()?;
    Ok(Literal { rel: atom_str(head)?.to_string(), args })
}

fn param_list(e: &SExpr) -> Result<Vec<String>, CanonError> {
    let items = list(e)?;
    if items.first().and_then(SExpr::as_atom) != Some(":parameters") || items.len() != 2 {
        return bad(e.pos(), "expected (:parameters (...))");
    }
    list(&items[1])?
        .iter()
        .map(|p| {
            let s = atom_str(p)?;
            s.strip_prefix('?').map(str::to_string).map_or_else(|| bad(p.pos(), "expected variable"), Ok)
        })
        .collect()
}

fn fill(s: &mut InstantaneousSchema, sections: &[SExpr]) -> Result<(), CanonError> {
    for sec in sections {
        let items = list(sec)?;
        let target = match sec.head() {
            Some(":pre+") => &mut s.pre_plus,
            Some(":pre-") => &mut s.pre_minus,
            Some(":eff+") => &mut s.eff_plus,
            Some(":eff-") => &mut s.eff_minus,
            _ => return bad(sec.pos(), "expected :pre+, :pre-, :eff+ or :eff-"),
        };
        for l in &items[1..] {
            target.insert(literal(l)?);
        }
    }
    Ok(())
}

/// Reads the output of [`render`] back into a canonical domain.
pub fn parse_canonical(text: &str) -> Result<CanonicalDomain, CanonError> {
    let exprs = read_all(text).map_err(|e| CanonError::Invalid { pos: e.pos(), msg: e.to_string() })?;
    let [top] = exprs.as_slice() else {
        return bad(Pos::default(), "expected one (canonical-domain ...) form");
    };
    let items = list(top)?;
    if top.head() != Some("canonical-domain") || items.len() < 2 {
        return bad(top.pos(), "expected (canonical-domain <name> ...)");
    }
    let mut d = CanonicalDomain {
        name: atom_str(&items[1])?.to_string(),
        relations: BTreeMap::new(),
        static_relations: BTreeSet::new(),
        type_chains: BTreeMap::new(),
        constants: Vec::new(),
        inst_schemas: Vec::new(),
        dur_schemas: Vec::new(),
    };
    for sec in &items[2..] {
        let s = list(sec)?;
        match sec.head() {
            Some(":relations") => {
                for r in &s[1..] {
                    let r = list(r)?;
                    let [name, arity] = r else {
                        return bad(sec.pos(), "expected (relation arity)");
                    };
                    let a = atom_str(arity)?.parse().or_else(|_| bad(arity.pos(), "bad arity"))?;
                    d.relations.insert(atom_str(name)?.to_string(), a);
                }
            }
            Some(":static") => {
                for r in &s[1..] {
                    d.static_relations.insert(atom_str(r)?.to_string());
                }
            }
            Some(":types") => {
                for c in &s[1..] {
                    let chain: Vec<String> = list(c)?.iter().map(|t| atom_str(t).map(str::to_string)).collect::<Result<_, _>>()?;
                    if let Some(first) = chain.first() {
                        d.type_chains.insert(first.clone(), chain);
                    }
                }
            }
            Some(":constants") => {
                for c in &s[1..] {
                    let [n, t] = list(c)? else {
                        return bad(c.pos(), "expected (constant type)");
                    };
                    d.constants.push((atom_str(n)?.to_string(), atom_str(t)?.to_string()));
                }
            }
            Some(":action") => {
                if s.len() < 3 {
                    return bad(sec.pos(), "malformed action");
                }
                let mut a = InstantaneousSchema::empty(atom_str(&s[1])?, param_list(&s[2])?);
                fill(&mut a, &s[3..])?;
                d.inst_schemas.push(a);
            }
            Some(":durative-action") => {
                if s.len() < 4 {
                    return bad(sec.pos(), "malformed durative action");
                }
                let name = atom_str(&s[1])?.to_string();
                let ps = param_list(&s[2])?;
                let dur = list(&s[3])?;
                if s[3].head() != Some(":duration") || dur.len() != 2 {
                    return bad(s[3].pos(), "expected (:duration ...)");
                }
                let mut frags = Vec::new();
                for (f, key) in s[4..].iter().zip(["st", "inv", "end"]) {
                    if f.head() != Some(&format!(":{key}")) {
                        return bad(f.pos(), format!("expected (:{key} ...)"));
                    }
                    let mut x = InstantaneousSchema::empty(&format!("{name}@{key}"), ps.clone());
                    fill(&mut x, &list(f)?[1..])?;
                    frags.push(x);
                }
                let [st, inv, end]: [InstantaneousSchema; 3] =
                    frags.try_into().or_else(|_| bad(sec.pos(), "expected :st, :inv and :end fragments"))?;
                d.dur_schemas.push(DurativeSchema { name, params: ps, duration: dur[1].to_string(), st, inv, end });
            }
            _ => return bad(sec.pos(), "unknown canonical section"),
        }
    }
    Ok(d)
}
