// Bag-set certain answers under both grounding scopes.

use chasebag::chase::ChaseConfig;
use chasebag::eval::{evaluate_certain_bag, EvalMode};
use chasebag::textio::{parse_program, parse_query, render_bag, BagFormat};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let program = parse_program(
        "rel Emp/1. rel Manager/1. rel WorksIn/2.
         Emp(ann). Manager(cat). WorksIn(ann, sales). WorksIn(ann, ops).
         Manager(x) -> Emp(x).
         Emp(x) -> exists d: WorksIn(x, d).",
    )?;
    let q = parse_query("q(x) <- WorksIn(x, d).", &program.schema)?;
    let config = ChaseConfig::default();

    let bag = evaluate_certain_bag(&q, &program, &config, EvalMode::PerDisjunct)?;
    print!("{}", render_bag(&bag, BagFormat::Table));
    // ann has two departments, cat one invented department
    assert_eq!(
        render_bag(&bag, BagFormat::Csv),
        "col1,multiplicity\nann,2\ncat,1\n"
    );

    let q = parse_query("q(x) <- Emp(x) | Manager(x).", &program.schema)?;
    let per = evaluate_certain_bag(&q, &program, &config, EvalMode::PerDisjunct)?;
    let whole = evaluate_certain_bag(&q, &program, &config, EvalMode::WholeQuery)?;
    print!("{}", render_bag(&per, BagFormat::Json));
    print!("{}", render_bag(&whole, BagFormat::Json));
    assert_eq!(per.total(), 3u8.into());
    assert_eq!(whole.total(), 2u8.into());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
