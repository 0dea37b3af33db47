//! Pretty-printing of raw ASTs back to PDDL text.

use std::fmt::Write;

use super::ast::*;

fn typed(out: &mut String, names: &[TypedName], var: bool) {
    let q = if var { "?" } else { "" };
    for (i, n) in names.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{q}{}", n.name);
        if let Some(t) = &n.ty {
            let _ = write!(out, " - {t}");
        }
    }
}

fn term(t: &Term) -> String {
    match t {
        Term::Var(v) => format!("?{v}"),
        Term::Const(c) => c.clone(),
    }
}

pub fn formula(f: &Formula) -> String {
    match f {
        Formula::Atom(a) => {
            let mut s = format!("({}", a.pred);
            for t in &a.args {
                s.push(' ');
                s.push_str(&term(t));
            }
            s.push(')');
            s
        }
        Formula::Not(g, _) => format!("(not {})", formula(g)),
        Formula::And(gs, _) | Formula::Or(gs, _) => {
            let head = if matches!(f, Formula::And(..)) { "and" } else { "or" };
            let mut s = format!("({head}");
            for g in gs {
                s.push(' ');
                s.push_str(&formula(g));
            }
            s.push(')');
            s
        }
        Formula::Forall(vs, g, _) | Formula::Exists(vs, g, _) => {
            let head = if matches!(f, Formula::Forall(..)) { "forall" } else { "exists" };
            let mut v = String::new();
            typed(&mut v, vs, true);
            format!("({head} ({v}) {})", formula(g))
        }
        Formula::When(c, e, _) => format!("(when {} {})", formula(c), formula(e)),
        Formula::Equal(a, b, _) => format!("(= {} {})", term(a), term(b)),
        Formula::Timed(t, g, _) => format!("({} {})", t.keyword(), formula(g)),
    }
}

pub fn domain(d: &RawDomain) -> String {
    let mut out = format!("(define (domain {})\n", d.name);
    if !d.requirements.is_empty() {
        let _ = writeln!(out, "  (:requirements {})", d.requirements.join(" "));
    }
    if !d.types.is_empty() {
        out.push_str("  (:types");
        for (t, p) in &d.types {
            let _ = write!(out, " {t} - {p}");
        }
        out.push_str(")\n");
    }
    if !d.constants.is_empty() {
        out.push_str("  (:constants ");
        typed(&mut out, &d.constants, false);
        out.push_str(")\n");
    }
    out.push_str("  (:predicates");
    for p in &d.predicates {
        let _ = write!(out, " ({}", p.name);
        if !p.params.is_empty() {
            out.push(' ');
            typed(&mut out, &p.params, true);
        }
        out.push(')');
    }
    out.push_str(")\n");
    for a in &d.actions {
        let (kw, cond_kw) = if a.is_durative() { (":durative-action", ":condition") } else { (":action", ":precondition") };
        let _ = write!(out, "  ({kw} {}\n    :parameters (", a.name);
        typed(&mut out, &a.params, true);
        out.push_str(")\n");
        if let ActionKind::Durative { duration } = &a.kind {
            let _ = writeln!(out, "    :duration {duration}");
        }
        if let Some(c) = &a.condition {
            let _ = writeln!(out, "    {cond_kw} {}", formula(c));
        }
        if let Some(e) = &a.effect {
            let _ = writeln!(out, "    :effect {}", formula(e));
        }
        out.push_str("  )\n");
    }
    out.push_str(")\n");
    out
}
