use std::fmt;
use std::sync::Arc;

/// Interned-ish name shared by constants, variables and relation symbols.
pub type Name = Arc<str>;

/// The building block of atoms and facts.
///
/// Ordering is `Const < Null < Var`, then by name or id, which gives the
/// lexicographic order used for active domains and answer tables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(Name),
    /// A value invented by a TGD firing. Never occurs in user input.
    Null(u64),
    Var(Name),
}

impl Term {
    pub fn constant(name: impl AsRef<str>) -> Self {
        Term::Const(Arc::from(name.as_ref()))
    }

    pub fn var(name: impl AsRef<str>) -> Self {
        Term::Var(Arc::from(name.as_ref()))
    }

    pub fn is_ground(&self) -> bool {
        !matches!(self, Term::Var(_))
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Term::Const(_))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Term::Null(_))
    }

    pub fn as_var(&self) -> Option<&Name> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_const(&self) -> Option<&str> {
        match self {
            Term::Const(c) => Some(c),
            _ => None,
        }
    }
}

/// Plain display: constants and variables by name, nulls as `_:n<id>`.
/// Use the `textio` renderers when the output must parse back.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{c}"),
            Term::Null(id) => write!(f, "_:n{id}"),
            Term::Var(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relation {
    name: Name,
    arity: usize,
}

impl Relation {
    /// Arity must be at least one.
    pub fn new(name: impl AsRef<str>, arity: usize) -> Self {
        assert!(arity >= 1, "relation arity must be positive");
        Relation {
            name: Arc::from(name.as_ref()),
            arity,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}
