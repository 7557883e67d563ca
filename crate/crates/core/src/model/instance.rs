use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use indexmap::{IndexMap, IndexSet};

use super::{ModelError, Name, Relation, Term};

/// A relational atom whose arguments may be variables, constants or nulls.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub relation: Relation,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(relation: Relation, args: Vec<Term>) -> Result<Self, ModelError> {
        if args.len() != relation.arity() {
            return Err(ModelError::ArityMismatch {
                relation: relation.name().to_string(),
                expected: relation.arity(),
                found: args.len(),
            });
        }
        Ok(Atom { relation, args })
    }

    pub fn variables(&self) -> impl Iterator<Item = &Name> {
        self.args.iter().filter_map(Term::as_var)
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_atom(f, self.relation.name(), &self.args)
    }
}

pub(crate) fn write_atom(f: &mut fmt::Formatter<'_>, name: &str, args: &[Term]) -> fmt::Result {
    write!(f, "{name}(")?;
    for (i, t) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{t}")?;
    }
    f.write_str(")")
}

/// A ground atom: constants and labeled nulls only.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    relation: Relation,
    args: Vec<Term>,
}

impl Fact {
    pub fn new(relation: Relation, args: Vec<Term>) -> Result<Self, ModelError> {
        if args.len() != relation.arity() {
            return Err(ModelError::ArityMismatch {
                relation: relation.name().to_string(),
                expected: relation.arity(),
                found: args.len(),
            });
        }
        if let Some(v) = args.iter().find_map(Term::as_var) {
            return Err(ModelError::NotGround(format!("variable {v} in fact")));
        }
        Ok(Fact { relation, args })
    }

    pub fn relation(&self) -> &Relation {
        &self.relation
    }

    pub fn args(&self) -> &[Term] {
        &self.args
    }

    pub fn has_null(&self) -> bool {
        self.args.iter().any(Term::is_null)
    }

    pub fn to_atom(&self) -> Atom {
        Atom {
            relation: self.relation.clone(),
            args: self.args.clone(),
        }
    }
}

impl TryFrom<Atom> for Fact {
    type Error = ModelError;

    fn try_from(atom: Atom) -> Result<Self, Self::Error> {
        Fact::new(atom.relation, atom.args)
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_atom(f, self.relation.name(), &self.args)
    }
}

/// Relation symbols in declaration order; names are unique.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    relations: IndexMap<Name, Relation>,
}

impl Schema {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_relations(
        relations: impl IntoIterator<Item = Relation>,
    ) -> Result<Self, ModelError> {
        let mut schema = Schema::new();
        for r in relations {
            schema.add(r)?;
        }
        Ok(schema)
    }

    pub fn add(&mut self, relation: Relation) -> Result<(), ModelError> {
        if self.relations.contains_key(relation.name()) {
            return Err(ModelError::DuplicateRelation(relation.name().to_string()));
        }
        self.relations.insert(Arc::from(relation.name()), relation);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    pub fn contains(&self, relation: &Relation) -> bool {
        self.get(relation.name()) == Some(relation)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Relation> {
        self.relations.values()
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }
}

/// A finite set of facts over a schema. Iteration follows insertion order,
/// which the chase scheduler relies on for reproducible runs.
#[derive(Clone, Debug)]
pub struct Instance {
    schema: Arc<Schema>,
    facts: IndexSet<Fact>,
    by_relation: HashMap<Name, Vec<usize>>,
}

impl Instance {
    pub fn new(schema: Arc<Schema>) -> Self {
        Instance {
            schema,
            facts: IndexSet::new(),
            by_relation: HashMap::new(),
        }
    }

    pub fn from_facts(
        schema: Arc<Schema>,
        facts: impl IntoIterator<Item = Fact>,
    ) -> Result<Self, ModelError> {
        let mut inst = Instance::new(schema);
        for f in facts {
            inst.insert(f)?;
        }
        Ok(inst)
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    /// Returns `Ok(true)` when the fact was not already present.
    pub fn insert(&mut self, fact: Fact) -> Result<bool, ModelError> {
        if !self.schema.contains(fact.relation()) {
            return Err(ModelError::UnknownRelation(fact.relation().to_string()));
        }
        let name: Name = Arc::from(fact.relation().name());
        let (idx, fresh) = self.facts.insert_full(fact);
        if fresh {
            self.by_relation.entry(name).or_default().push(idx);
        }
        Ok(fresh)
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.facts.contains(fact)
    }

    pub fn index_of(&self, fact: &Fact) -> Option<usize> {
        self.facts.get_index_of(fact)
    }

    pub fn get(&self, idx: usize) -> Option<&Fact> {
        self.facts.get_index(idx)
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Fact> {
        self.facts.iter()
    }

    /// Facts of one relation, in insertion order.
    pub fn facts_of<'a>(&'a self, relation: &str) -> impl Iterator<Item = &'a Fact> + 'a {
        self.by_relation
            .get(relation)
            .into_iter()
            .flatten()
            .map(move |&i| &self.facts[i])
    }

    pub fn count_of(&self, relation: &str) -> usize {
        self.by_relation.get(relation).map_or(0, Vec::len)
    }

    /// The active domain, in term order.
    pub fn adom(&self) -> BTreeSet<Term> {
        self.facts
            .iter()
            .flat_map(|f| f.args().iter().cloned())
            .collect()
    }

    /// True when both instances hold the same set of facts, ignoring order.
    pub fn same_facts(&self, other: &Instance) -> bool {
        self.len() == other.len() && self.iter().all(|f| other.contains(f))
    }
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.schema == other.schema && self.same_facts(other)
    }
}

impl Eq for Instance {}
