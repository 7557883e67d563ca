//! Domain types shared by every other module: terms, schemas, facts,
//! instances, dependencies, queries, groundings and answer bags.

mod bag;
mod instance;
mod query;
mod term;

pub use bag::{AnswerBag, Exactness, Tuple};
pub use instance::{Atom, Fact, Instance, Schema};
pub use query::{apply_grounding, Dependency, DependencyKind, Disjunct, Grounding, Ucq};
pub use term::{Name, Relation, Term};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("arity mismatch for `{relation}`: expected {expected}, found {found}")]
    ArityMismatch {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("duplicate relation `{0}`")]
    DuplicateRelation(String),
    #[error("not ground: {0}")]
    NotGround(String),
    #[error("incomplete grounding: variable `{0}` is unbound")]
    IncompleteGrounding(String),
    #[error("unsupported dependency form: {0}")]
    UnsupportedDependency(String),
    #[error("a disjunct must contain at least one atom")]
    EmptyDisjunct,
    #[error("labeled nulls cannot occur in a query")]
    NullInQuery,
    #[error("head variable `{var}` does not occur in disjunct {disjunct}")]
    UnsafeHead { var: String, disjunct: usize },
    #[error("bad binding: {0}")]
    BadBinding(String),
    #[error("answer tuples may hold constants only, found `{0}`")]
    NonConstantAnswer(String),
}

/// `adom(I)`: the ground terms occurring in the instance, in term order.
pub fn adom(instance: &Instance) -> std::collections::BTreeSet<Term> {
    instance.adom()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn rel(name: &str, arity: usize) -> Relation {
        Relation::new(name, arity)
    }

    fn c(name: &str) -> Term {
        Term::constant(name)
    }

    fn v(name: &str) -> Term {
        Term::var(name)
    }

    fn schema() -> Arc<Schema> {
        Arc::new(Schema::from_relations([rel("R", 2), rel("P", 1)]).unwrap())
    }

    #[test]
    fn adom_of_empty_instance_is_empty() {
        let inst = Instance::new(schema());
        assert!(adom(&inst).is_empty());
    }

    #[test]
    fn adom_collects_argument_terms() {
        let inst = Instance::from_facts(
            schema(),
            [
                Fact::new(rel("R", 2), vec![c("a"), c("b")]).unwrap(),
                Fact::new(rel("P", 1), vec![c("a")]).unwrap(),
            ],
        )
        .unwrap();
        let dom: Vec<Term> = adom(&inst).into_iter().collect();
        assert_eq!(dom, vec![c("a"), c("b")]);
    }

    #[test]
    fn inserting_a_fact_twice_is_a_no_op() {
        let mut inst = Instance::new(schema());
        let f = Fact::new(rel("P", 1), vec![c("a")]).unwrap();
        assert!(inst.insert(f.clone()).unwrap());
        assert!(!inst.insert(f).unwrap());
        assert_eq!(inst.len(), 1);
    }

    #[test]
    fn facts_reject_variables_and_bad_arity() {
        assert!(matches!(
            Fact::new(rel("P", 1), vec![v("x")]),
            Err(ModelError::NotGround(_))
        ));
        assert!(matches!(
            Fact::new(rel("R", 2), vec![c("a")]),
            Err(ModelError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn unknown_relation_is_rejected_by_instance() {
        let mut inst = Instance::new(schema());
        let f = Fact::new(rel("S", 1), vec![c("a")]).unwrap();
        assert!(matches!(
            inst.insert(f),
            Err(ModelError::UnknownRelation(_))
        ));
    }

    fn grounding(pairs: &[(&str, &str)]) -> Grounding {
        pairs
            .iter()
            .map(|(k, val)| (Name::from(*k), c(val)))
            .collect()
    }

    #[test]
    fn apply_grounding_replaces_variables() {
        let d = Disjunct::new(vec![Atom::new(rel("R", 2), vec![v("x"), v("y")]).unwrap()]).unwrap();
        let facts = apply_grounding(&d, &grounding(&[("x", "a"), ("y", "b")])).unwrap();
        assert_eq!(
            facts,
            vec![Fact::new(rel("R", 2), vec![c("a"), c("b")]).unwrap()]
        );
    }

    #[test]
    fn apply_grounding_repeated_variable() {
        let d = Disjunct::new(vec![Atom::new(rel("R", 2), vec![v("x"), v("x")]).unwrap()]).unwrap();
        let facts = apply_grounding(&d, &grounding(&[("x", "a")])).unwrap();
        assert_eq!(facts[0].args(), &[c("a"), c("a")]);
    }

    #[test]
    fn apply_grounding_keeps_constants() {
        let d = Disjunct::new(vec![Atom::new(rel("R", 2), vec![v("x"), c("c")]).unwrap()]).unwrap();
        let facts = apply_grounding(&d, &grounding(&[("x", "a")])).unwrap();
        assert_eq!(facts[0].args(), &[c("a"), c("c")]);
    }

    #[test]
    fn apply_grounding_reports_unbound_variable() {
        let d = Disjunct::new(vec![Atom::new(rel("R", 2), vec![v("x"), v("y")]).unwrap()]).unwrap();
        let err = apply_grounding(&d, &grounding(&[("x", "a")])).unwrap_err();
        assert_eq!(err, ModelError::IncompleteGrounding("y".into()));
        assert!(err.to_string().contains("incomplete grounding"));
    }

    #[test]
    fn apply_grounding_is_idempotent_on_ground_atoms() {
        let d = Disjunct::new(vec![Atom::new(rel("R", 2), vec![v("x"), c("c")]).unwrap()]).unwrap();
        let g = grounding(&[("x", "a")]);
        let once = apply_grounding(&d, &g).unwrap();
        let again = Disjunct::new(once.iter().map(Fact::to_atom).collect()).unwrap();
        assert_eq!(apply_grounding(&again, &g).unwrap(), once);
    }

    #[test]
    fn answer_bag_rejects_nulls_and_drops_zero_counts() {
        let mut bag = AnswerBag::new(1, Exactness::Exact);
        assert!(bag.add_one(vec![Term::Null(0)]).is_err());
        bag.add(vec![c("a")], 0u8.into()).unwrap();
        assert!(bag.is_empty());
        bag.add_one(vec![c("a")]).unwrap();
        bag.add_one(vec![c("a")]).unwrap();
        assert_eq!(bag.multiplicity(&[c("a")]), 2u8.into());
    }

    #[test]
    fn dependency_shapes_are_checked() {
        assert!(Dependency::inclusion(rel("R", 2), rel("P", 1)).is_err());
        assert!(Dependency::tgd(rel("R", 2), rel("P", 1)).is_err());
        assert!(Dependency::tgd(rel("R", 2), rel("R", 2)).is_err());
        let d = Dependency::tgd(rel("P", 1), rel("R", 3)).unwrap();
        assert_eq!(d.n_existential(), 2);
        assert_eq!(d.to_string(), "P(x1) -> exists y1, y2: R(x1, y1, y2)");
    }

    #[test]
    fn ucq_enforces_head_safety() {
        let d = Disjunct::new(vec![Atom::new(rel("R", 2), vec![v("y"), v("y")]).unwrap()]).unwrap();
        let err = Ucq::new("q", vec![Name::from("x")], vec![d]).unwrap_err();
        assert!(matches!(err, ModelError::UnsafeHead { .. }));
    }
}
