mod common;

use chasebag::chase::{run_chase, ChaseConfig};
use chasebag::eval::{evaluate_certain_bag, evaluate_cq_bag, satisfying_groundings, EvalMode};
use chasebag::oracle::{brute_force_certain_bag, brute_force_groundings, diff_bags, OracleError};
use common::{random_cq, random_program, random_ucq, rng, Shape};
use proptest::prelude::*;

const MODES: [EvalMode; 2] = [EvalMode::PerDisjunct, EvalMode::WholeQuery];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn no_dependencies_means_plain_evaluation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_program(&mut r, &Shape::plain());
        let q = random_ucq(&mut r, &p.schema, 4);
        for mode in MODES {
            let certain = evaluate_certain_bag(&q, &p, &ChaseConfig::default(), mode).unwrap();
            let plain = evaluate_cq_bag(&q, &p.instance, &p.instance, mode).unwrap();
            prop_assert_eq!(certain, plain);
        }
    }

    #[test]
    fn engine_agrees_with_enumeration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_program(&mut r, &Shape::mixed());
        let q = random_ucq(&mut r, &p.schema, 3);
        for mode in MODES {
            let engine = evaluate_certain_bag(&q, &p, &ChaseConfig::default(), mode).unwrap();
            match brute_force_certain_bag(&q, &p, &ChaseConfig::default(), mode) {
                Ok(oracle) => prop_assert!(diff_bags(&engine, &oracle, "engine vs oracle").unwrap().is_empty()),
                Err(OracleError::ScaleExceeded { .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn join_finds_exactly_the_enumerated_groundings(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_program(&mut r, &Shape::mixed());
        let q = random_ucq(&mut r, &p.schema, 3);
        let chase = run_chase(&p, &ChaseConfig::default()).unwrap();
        for d in q.disjuncts() {
            prop_assert_eq!(satisfying_groundings(d, &chase.instance), brute_force_groundings(d, &chase.instance));
        }
    }

    #[test]
    fn scopes_agree_on_one_disjunct(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_program(&mut r, &Shape::mixed());
        let q = random_cq(&mut r, &p.schema, 3);
        let config = ChaseConfig::default();
        prop_assert_eq!(
            evaluate_certain_bag(&q, &p, &config, EvalMode::PerDisjunct).unwrap(),
            evaluate_certain_bag(&q, &p, &config, EvalMode::WholeQuery).unwrap()
        );
    }

    #[test]
    fn scopes_share_keys(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_program(&mut r, &Shape::mixed());
        let q = random_ucq(&mut r, &p.schema, 3);
        let config = ChaseConfig::default();
        let per = evaluate_certain_bag(&q, &p, &config, EvalMode::PerDisjunct).unwrap();
        let whole = evaluate_certain_bag(&q, &p, &config, EvalMode::WholeQuery).unwrap();
        prop_assert!(per.same_keys(&whole));
    }

    #[test]
    fn answers_use_input_constants_only(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_program(&mut r, &Shape::mixed());
        let q = random_ucq(&mut r, &p.schema, 3);
        let bag = evaluate_certain_bag(&q, &p, &ChaseConfig::default(), EvalMode::PerDisjunct).unwrap();
        let dom = p.instance.adom();
        prop_assert!(bag.keys().flatten().all(|t| t.is_const() && dom.contains(t)));
    }
}
