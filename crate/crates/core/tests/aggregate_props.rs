mod common;

use chasebag::aggregate::{aggregate, aggregate_certain, parse_decimal, AggregateSpec};
use chasebag::chase::ChaseConfig;
use chasebag::eval::EvalMode;
use chasebag::model::{AnswerBag, Exactness, Term};
use chasebag::textio::{parse_program, parse_query};
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn bag_of(rows: &[(i32, u32)]) -> AnswerBag {
    let mut bag = AnswerBag::new(1, Exactness::Exact);
    for (v, m) in rows {
        bag.add(vec![Term::constant(v.to_string())], (*m).into())
            .unwrap();
    }
    bag
}

proptest! {
    #[test]
    fn count_bounds_count_distinct(rows in proptest::collection::btree_map(-50i32..50, 1u32..4, 0..8)) {
        let rows: Vec<(i32, u32)> = rows.into_iter().collect();
        let bag = bag_of(&rows);
        let count = aggregate(&bag, &AggregateSpec::count()).unwrap().value;
        let distinct = aggregate(&bag, &AggregateSpec::count_distinct()).unwrap().value;
        prop_assert!(count >= distinct);
        prop_assert_eq!(count == distinct, rows.iter().all(|r| r.1 == 1));
    }

    #[test]
    fn sum_ignores_insertion_order(rows in proptest::collection::btree_map(-50i32..50, 1u32..4, 1..8)) {
        let mut rows: Vec<(i32, u32)> = rows.into_iter().collect();
        let a = bag_of(&rows);
        rows.reverse();
        let b = bag_of(&rows);
        for spec in [AggregateSpec::sum(1), AggregateSpec::avg(1)] {
            prop_assert_eq!(aggregate(&a, &spec).unwrap(), aggregate(&b, &spec).unwrap());
        }
    }

    #[test]
    fn matches_a_direct_pass_without_dependencies(values in proptest::collection::vec((0u8..3, -20i32..20), 0..10)) {
        let mut src = String::from("rel S/2.\n");
        for (k, v) in &values {
            src.push_str(&format!("S(k{k}, {v}).\n"));
        }
        let p = parse_program(&src).unwrap();
        let q = parse_query("q(k, v) <- S(k, v).", &p.schema).unwrap();
        let sum = aggregate_certain(&q, &p, &AggregateSpec::sum(2), &ChaseConfig::default(), EvalMode::PerDisjunct).unwrap();
        let mut direct = BigRational::zero();
        for f in p.instance.iter() {
            direct += parse_decimal(f.args()[1].as_const().unwrap()).unwrap();
        }
        prop_assert_eq!(sum.value, direct);
    }
}
