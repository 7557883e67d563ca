// Cross-check the engine against brute-force enumeration.

use chasebag::chase::ChaseConfig;
use chasebag::eval::{evaluate_certain_bag, EvalMode};
use chasebag::model::{Fact, Relation, Term};
use chasebag::oracle::{brute_force_certain_bag, derivation_search, diff_bags};
use chasebag::textio::{parse_program, parse_query};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let program = parse_program(
        "rel R/1. rel S/1. rel T/2.
         R(a). R(b). S(b).
         R(x) -> S(x).
         S(x) -> exists y: T(x, y).",
    )?;
    let q = parse_query("q(x) <- T(x, y) | S(x), R(x).", &program.schema)?;
    let config = ChaseConfig::default();
    for mode in [EvalMode::PerDisjunct, EvalMode::WholeQuery] {
        let engine = evaluate_certain_bag(&q, &program, &config, mode)?;
        let oracle = brute_force_certain_bag(&q, &program, &config, mode)?;
        assert!(diff_bags(&engine, &oracle, "engine vs oracle")?.is_empty());
    }

    let goal = Fact::new(Relation::new("S", 1), vec![Term::constant("a")])?;
    let path = derivation_search(&program, &goal, 4).expect("derivable");
    let shown: Vec<String> = path.iter().map(|f| f.to_string()).collect();
    println!("{}", shown.join(" => "));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
