use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

use super::{ModelError, Term};

/// Whether multiplicities are final or only valid up to a chase level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exactness {
    Exact,
    /// The chase stopped at this level before reaching a fixpoint; every
    /// multiplicity is a lower bound of the true (possibly infinite) count.
    LowerBoundAtLevel(u64),
}

impl Exactness {
    pub fn is_exact(self) -> bool {
        matches!(self, Exactness::Exact)
    }
}

impl fmt::Display for Exactness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exactness::Exact => f.write_str("exact"),
            Exactness::LowerBoundAtLevel(k) => write!(f, "lower bound at level {k}"),
        }
    }
}

pub type Tuple = Vec<Term>;

/// A multiset of answer tuples. Keys hold constants only and every stored
/// multiplicity is at least one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnswerBag {
    arity: usize,
    entries: BTreeMap<Tuple, BigUint>,
    exactness: Exactness,
}

impl AnswerBag {
    pub fn new(arity: usize, exactness: Exactness) -> Self {
        AnswerBag {
            arity,
            entries: BTreeMap::new(),
            exactness,
        }
    }

    /// Adds `count` copies of `tuple`. Adding zero is a no-op.
    pub fn add(&mut self, tuple: Tuple, count: BigUint) -> Result<(), ModelError> {
        if tuple.len() != self.arity {
            return Err(ModelError::ArityMismatch {
                relation: "answer".into(),
                expected: self.arity,
                found: tuple.len(),
            });
        }
        if let Some(t) = tuple.iter().find(|t| !t.is_const()) {
            return Err(ModelError::NonConstantAnswer(t.to_string()));
        }
        if count.is_zero() {
            return Ok(());
        }
        *self.entries.entry(tuple).or_default() += count;
        Ok(())
    }

    pub fn add_one(&mut self, tuple: Tuple) -> Result<(), ModelError> {
        self.add(tuple, BigUint::from(1u8))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn exactness(&self) -> Exactness {
        self.exactness
    }

    pub fn set_exactness(&mut self, exactness: Exactness) {
        self.exactness = exactness;
    }

    /// Zero for absent tuples.
    pub fn multiplicity(&self, tuple: &[Term]) -> BigUint {
        self.entries.get(tuple).cloned().unwrap_or_default()
    }

    /// Entries in lexicographic tuple order.
    pub fn iter(&self) -> impl Iterator<Item = (&Tuple, &BigUint)> {
        self.entries.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &Tuple> {
        self.entries.keys()
    }

    /// Number of distinct tuples.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of all multiplicities.
    pub fn total(&self) -> BigUint {
        self.entries.values().sum()
    }

    /// Bag equality ignoring the exactness tag.
    pub fn same_entries(&self, other: &AnswerBag) -> bool {
        self.arity == other.arity && self.entries == other.entries
    }

    pub fn same_keys(&self, other: &AnswerBag) -> bool {
        self.arity == other.arity && self.entries.keys().eq(other.entries.keys())
    }
}
