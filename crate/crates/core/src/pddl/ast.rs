use super::sexpr::Pos;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Var(s) | Term::Const(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    /// `None` means the implicit `object` type.
    pub ty: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeSpec {
    AtStart,
    OverAll,
    AtEnd,
}

impl TimeSpec {
    pub fn keyword(self) -> &'static str {
        match self {
            TimeSpec::AtStart => "at start",
            TimeSpec::OverAll => "over all",
            TimeSpec::AtEnd => "at end",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>, Pos),
    And(Vec<Formula>, Pos),
    Or(Vec<Formula>, Pos),
    Forall(Vec<TypedName>, Box<Formula>, Pos),
    Exists(Vec<TypedName>, Box<Formula>, Pos),
    When(Box<Formula>, Box<Formula>, Pos),
    Equal(Term, Term, Pos),
    Timed(TimeSpec, Box<Formula>, Pos),
}

impl Formula {
    pub fn pos(&self) -> Pos {
        match self {
            Formula::Atom(a) => a.pos,
            Formula::Not(_, p)
            | Formula::And(_, p)
            | Formula::Or(_, p)
            | Formula::Forall(_, _, p)
            | Formula::Exists(_, _, p)
            | Formula::When(_, _, p)
            | Formula::Equal(_, _, p)
            | Formula::Timed(_, _, p) => *p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedName>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionKind {
    Instantaneous,
    /// The duration constraint, kept as source text and never evaluated.
    Durative {
        duration: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawAction {
    pub name: String,
    pub params: Vec<TypedName>,
    pub kind: ActionKind,
    pub condition: Option<Formula>,
    pub effect: Option<Formula>,
    pub pos: Pos,
}

impl RawAction {
    pub fn is_durative(&self) -> bool {
        matches!(self.kind, ActionKind::Durative { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawDomain {
    pub name: String,
    pub requirements: Vec<String>,
    /// Declared types with their parent (`object` when none is given).
    pub types: Vec<(String, String)>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateDecl>,
    pub actions: Vec<RawAction>,
}

impl RawDomain {
    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    /// Parent of a declared type, `None` for `object` or unknown names.
    pub fn parent_of(&self, ty: &str) -> Option<&str> {
        self.types.iter().find(|(t, _)| t == ty).map(|(_, p)| p.as_str())
    }

    /// `ty` followed by its ancestors up to and including `object`.
    pub fn type_chain(&self, ty: &str) -> Vec<String> {
        let mut out = vec![ty.to_string()];
        let mut cur = ty.to_string();
        while let Some(p) = self.parent_of(&cur) {
            if out.iter().any(|t| t == p) {
                break;
            }
            out.push(p.to_string());
            cur = p.to_string();
        }
        if !out.iter().any(|t| t == "object") {
            out.push("object".to_string());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundLiteral {
    pub pred: String,
    pub args: Vec<String>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawProblem {
    pub name: String,
    pub domain: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<GroundLiteral>,
    pub goal: Option<Formula>,
}
