use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Atom, Fact, ModelError, Name, Relation, Term};

/// The two dependency shapes the engine supports.
///
/// * an inclusion dependency `R(x1..xn) -> S(x1..xn)`;
/// * a tuple-generating dependency `R(x1..xn) -> exists y1..ym: S(x1..xn, y1..ym)`,
///   with the shared variables forming a prefix of the head atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DependencyKind {
    Inclusion,
    TupleGenerating { existentials: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dependency {
    from: Relation,
    to: Relation,
    kind: DependencyKind,
}

impl Dependency {
    pub fn inclusion(from: Relation, to: Relation) -> Result<Self, ModelError> {
        if from.arity() != to.arity() {
            return Err(ModelError::UnsupportedDependency(format!(
                "inclusion dependency {from} -> {to} changes arity"
            )));
        }
        Ok(Dependency {
            from,
            to,
            kind: DependencyKind::Inclusion,
        })
    }

    pub fn tgd(from: Relation, to: Relation) -> Result<Self, ModelError> {
        if to.arity() <= from.arity() {
            return Err(ModelError::UnsupportedDependency(format!(
                "tgd {from} -> {to} must introduce at least one existential position"
            )));
        }
        let existentials = to.arity() - from.arity();
        Ok(Dependency {
            from,
            to,
            kind: DependencyKind::TupleGenerating { existentials },
        })
    }

    pub fn from(&self) -> &Relation {
        &self.from
    }

    pub fn to(&self) -> &Relation {
        &self.to
    }

    pub fn kind(&self) -> &DependencyKind {
        &self.kind
    }

    pub fn is_tgd(&self) -> bool {
        matches!(self.kind, DependencyKind::TupleGenerating { .. })
    }

    /// Zero for inclusion dependencies.
    pub fn n_existential(&self) -> usize {
        match self.kind {
            DependencyKind::Inclusion => 0,
            DependencyKind::TupleGenerating { existentials } => existentials,
        }
    }
}

/// Renders with variables `x1..xn` and existentials `y1..ym`.
impl fmt::Display for Dependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let xs: Vec<String> = (1..=self.from.arity()).map(|i| format!("x{i}")).collect();
        let ys: Vec<String> = (1..=self.n_existential())
            .map(|i| format!("y{i}"))
            .collect();
        write!(f, "{}({}) -> ", self.from.name(), xs.join(", "))?;
        if !ys.is_empty() {
            write!(f, "exists {}: ", ys.join(", "))?;
        }
        let head: Vec<&String> = xs.iter().chain(ys.iter()).collect();
        let head: Vec<&str> = head.iter().map(|s| s.as_str()).collect();
        write!(f, "{}({})", self.to.name(), head.join(", "))
    }
}

/// One conjunction of atoms in a UCQ body. Atoms hold variables and
/// constants only.
///
/// A disjunct may also fix variables that occur in no atom, through
/// bindings `x = t` where `t` is a constant or a variable of the atoms.
/// Rewriting produces them when a head variable is unified away.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Disjunct {
    atoms: Vec<Atom>,
    bindings: Vec<(Name, Term)>,
}

impl Disjunct {
    pub fn new(atoms: Vec<Atom>) -> Result<Self, ModelError> {
        Self::with_bindings(atoms, Vec::new())
    }

    pub fn with_bindings(
        atoms: Vec<Atom>,
        mut bindings: Vec<(Name, Term)>,
    ) -> Result<Self, ModelError> {
        if atoms.is_empty() {
            return Err(ModelError::EmptyDisjunct);
        }
        if atoms
            .iter()
            .flat_map(|a| &a.args)
            .chain(bindings.iter().map(|(_, t)| t))
            .any(Term::is_null)
        {
            return Err(ModelError::NullInQuery);
        }
        bindings.sort();
        let in_atoms = |v: &str| atoms.iter().flat_map(Atom::variables).any(|w| &**w == v);
        for (i, (v, t)) in bindings.iter().enumerate() {
            if in_atoms(v) || (i > 0 && bindings[i - 1].0 == *v) {
                return Err(ModelError::BadBinding(format!(
                    "`{v}` is already determined"
                )));
            }
            if let Term::Var(w) = t {
                if !in_atoms(w) {
                    return Err(ModelError::BadBinding(format!(
                        "`{v} = {w}`: `{w}` occurs in no atom"
                    )));
                }
            }
        }
        Ok(Disjunct { atoms, bindings })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Sorted by variable.
    pub fn bindings(&self) -> &[(Name, Term)] {
        &self.bindings
    }

    /// Variables in first-occurrence order, bound variables last.
    pub fn variables(&self) -> Vec<Name> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for v in self.atoms.iter().flat_map(Atom::variables) {
            if seen.insert(v.clone()) {
                out.push(v.clone());
            }
        }
        out.extend(self.bindings.iter().map(|(v, _)| v.clone()));
        out
    }

    pub fn mentions(&self, var: &str) -> bool {
        self.atoms
            .iter()
            .flat_map(Atom::variables)
            .chain(self.bindings.iter().map(|(v, _)| v))
            .any(|v| &**v == var)
    }

    pub fn relations(&self) -> impl Iterator<Item = &Relation> {
        self.atoms.iter().map(|a| &a.relation)
    }
}

impl fmt::Display for Disjunct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        for (v, t) in &self.bindings {
            write!(f, ", {v} = {t}")?;
        }
        Ok(())
    }
}

/// A union of conjunctive queries `q(x..) <- d0 | d1 | ...`.
///
/// Every head variable occurs in every disjunct, so a satisfying grounding of
/// any disjunct determines a full answer tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ucq {
    name: Name,
    head: Vec<Name>,
    disjuncts: Vec<Disjunct>,
}

impl Ucq {
    pub fn new(
        name: impl AsRef<str>,
        head: Vec<Name>,
        disjuncts: Vec<Disjunct>,
    ) -> Result<Self, ModelError> {
        if disjuncts.is_empty() {
            return Err(ModelError::EmptyDisjunct);
        }
        for (i, d) in disjuncts.iter().enumerate() {
            if let Some(v) = head.iter().find(|v| !d.mentions(v)) {
                return Err(ModelError::UnsafeHead {
                    var: v.to_string(),
                    disjunct: i,
                });
            }
            if let Some((v, _)) = d.bindings().iter().find(|(v, _)| !head.contains(v)) {
                return Err(ModelError::BadBinding(format!(
                    "`{v}` is not a head variable"
                )));
            }
        }
        Ok(Ucq {
            name: Name::from(name.as_ref()),
            head,
            disjuncts,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn head(&self) -> &[Name] {
        &self.head
    }

    pub fn arity(&self) -> usize {
        self.head.len()
    }

    pub fn is_boolean(&self) -> bool {
        self.head.is_empty()
    }

    pub fn disjuncts(&self) -> &[Disjunct] {
        &self.disjuncts
    }

    /// `Var(q)`: the variables of all disjuncts, in first-occurrence order.
    pub fn variables(&self) -> Vec<Name> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for v in self
            .head
            .iter()
            .cloned()
            .chain(self.disjuncts.iter().flat_map(|d| d.variables()))
        {
            if seen.insert(v.clone()) {
                out.push(v);
            }
        }
        out
    }
}

impl fmt::Display for Ucq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<&str> = self.head.iter().map(|v| &**v).collect();
        write!(f, "{}({}) <- ", self.name, head.join(", "))?;
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// A total map from a declared variable set to ground terms.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Grounding {
    map: BTreeMap<Name, Term>,
}

impl Grounding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, var: Name, value: Term) -> Result<(), ModelError> {
        if !value.is_ground() {
            return Err(ModelError::NotGround(format!(
                "{var} bound to variable {value}"
            )));
        }
        self.map.insert(var, value);
        Ok(())
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.map.get(var)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.map.iter()
    }

    /// Values of `vars`, or `None` if one is unbound.
    pub fn project(&self, vars: &[Name]) -> Option<Vec<Term>> {
        vars.iter().map(|v| self.map.get(v).cloned()).collect()
    }

    /// Replaces each variable by its value. Non-variable terms pass through,
    /// so re-applying to an already ground atom is the identity.
    pub fn apply_atom(&self, atom: &Atom) -> Result<Fact, ModelError> {
        let args = atom
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => self
                    .map
                    .get(v)
                    .cloned()
                    .ok_or_else(|| ModelError::IncompleteGrounding(v.to_string())),
                other => Ok(other.clone()),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Fact::new(atom.relation.clone(), args)
    }
}

impl FromIterator<(Name, Term)> for Grounding {
    fn from_iter<I: IntoIterator<Item = (Name, Term)>>(iter: I) -> Self {
        Grounding {
            map: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for Grounding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}↦{v}")?;
        }
        f.write_str("}")
    }
}

/// `qγ` for one disjunct: every atom with its variables replaced.
pub fn apply_grounding(disjunct: &Disjunct, g: &Grounding) -> Result<Vec<Fact>, ModelError> {
    disjunct.atoms().iter().map(|a| g.apply_atom(a)).collect()
}
