//! Seeded random programs and queries shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use chasebag::model::{
    Atom, Dependency, Disjunct, Fact, Instance, Name, Relation, Schema, Term, Ucq,
};
use chasebag::textio::Program;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug)]
pub struct Shape {
    pub max_relations: usize,
    pub max_arity: usize,
    pub max_facts: usize,
    pub constants: usize,
    pub max_ids: usize,
    pub max_tgds: usize,
}

impl Shape {
    /// Up to 4 relations of arity up to 3, up to 12 facts, no dependencies.
    pub fn plain() -> Self {
        Shape {
            max_relations: 4,
            max_arity: 3,
            max_facts: 12,
            constants: 4,
            max_ids: 0,
            max_tgds: 0,
        }
    }

    pub fn ids_only() -> Self {
        Shape {
            max_ids: 4,
            ..Shape::plain()
        }
    }

    /// Mostly inclusion dependencies with a couple of TGDs.
    pub fn mixed() -> Self {
        Shape {
            max_facts: 6,
            constants: 3,
            max_ids: 4,
            max_tgds: 2,
            ..Shape::plain()
        }
    }
}

pub fn random_schema(rng: &mut ChaCha8Rng, shape: &Shape) -> Arc<Schema> {
    let n = rng.gen_range(1..=shape.max_relations);
    let mut arities: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=shape.max_arity)).collect();
    // keep at least one pair of equal arity around for inclusion dependencies
    if n >= 2 && shape.max_ids > 0 && rng.gen_bool(0.5) {
        arities[1] = arities[0];
    }
    let relations = arities
        .iter()
        .enumerate()
        .map(|(i, &a)| Relation::new(format!("R{i}"), a));
    Arc::new(Schema::from_relations(relations).expect("distinct names"))
}

pub fn constant(i: usize) -> Term {
    Term::constant(format!("c{i}"))
}

pub fn random_instance(rng: &mut ChaCha8Rng, schema: &Arc<Schema>, shape: &Shape) -> Instance {
    let relations: Vec<Relation> = schema.iter().cloned().collect();
    let mut inst = Instance::new(schema.clone());
    let n = rng.gen_range(0..=shape.max_facts);
    for _ in 0..n {
        let r = relations.choose(rng).expect("nonempty schema").clone();
        let args = (0..r.arity())
            .map(|_| constant(rng.gen_range(0..shape.constants)))
            .collect();
        inst.insert(Fact::new(r, args).expect("ground"))
            .expect("declared");
    }
    inst
}

pub fn random_dependencies(
    rng: &mut ChaCha8Rng,
    schema: &Schema,
    shape: &Shape,
) -> Vec<Dependency> {
    let relations: Vec<&Relation> = schema.iter().collect();
    let mut ids = Vec::new();
    let mut tgds = Vec::new();
    for a in &relations {
        for b in &relations {
            if a.name() == b.name() {
                continue;
            }
            if a.arity() == b.arity() {
                ids.push(Dependency::inclusion((*a).clone(), (*b).clone()).expect("same arity"));
            } else if a.arity() < b.arity() {
                tgds.push(Dependency::tgd((*a).clone(), (*b).clone()).expect("wider target"));
            }
        }
    }
    ids.shuffle(rng);
    tgds.shuffle(rng);
    let n_ids = rng.gen_range(0..=shape.max_ids.min(ids.len()));
    let n_tgds = rng.gen_range(0..=shape.max_tgds.min(tgds.len()));
    let mut deps: Vec<Dependency> = ids
        .into_iter()
        .take(n_ids)
        .chain(tgds.into_iter().take(n_tgds))
        .collect();
    deps.shuffle(rng);
    deps
}

pub fn random_program(rng: &mut ChaCha8Rng, shape: &Shape) -> Program {
    let schema = random_schema(rng, shape);
    let instance = random_instance(rng, &schema, shape);
    let dependencies = random_dependencies(rng, &schema, shape);
    Program {
        schema,
        instance,
        dependencies,
    }
}

fn var(i: usize) -> Term {
    Term::var(format!("v{i}"))
}

/// Up to 3 atoms over up to 4 variables, occasionally with a constant.
pub fn random_disjunct(rng: &mut ChaCha8Rng, schema: &Schema, constants: usize) -> Disjunct {
    let relations: Vec<&Relation> = schema.iter().collect();
    let n = rng.gen_range(1..=3);
    let atoms = (0..n)
        .map(|_| {
            let r = (*relations.choose(rng).expect("nonempty schema")).clone();
            let args = (0..r.arity())
                .map(|_| {
                    if rng.gen_bool(0.15) {
                        constant(rng.gen_range(0..constants))
                    } else {
                        var(rng.gen_range(0..4))
                    }
                })
                .collect();
            Atom::new(r, args).expect("arity")
        })
        .collect();
    Disjunct::new(atoms).expect("nonempty")
}

pub fn random_cq(rng: &mut ChaCha8Rng, schema: &Schema, constants: usize) -> Ucq {
    let d = random_disjunct(rng, schema, constants);
    let head: Vec<Name> = d
        .variables()
        .into_iter()
        .filter(|_| rng.gen_bool(0.5))
        .collect();
    Ucq::new("q", head, vec![d]).expect("head drawn from the body")
}

/// One to three disjuncts sharing the head variables of the first.
pub fn random_ucq(rng: &mut ChaCha8Rng, schema: &Schema, constants: usize) -> Ucq {
    let first = random_cq(rng, schema, constants);
    let head = first.head().to_vec();
    let mut disjuncts = first.disjuncts().to_vec();
    let extra = rng.gen_range(0..=2);
    for _ in 0..extra {
        for _ in 0..20 {
            let d = random_disjunct(rng, schema, constants);
            if head.iter().all(|h| d.mentions(h)) {
                disjuncts.push(d);
                break;
            }
        }
    }
    Ucq::new("q", head, disjuncts).expect("safe by construction")
}
