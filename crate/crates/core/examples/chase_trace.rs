// Run the restricted and the oblivious chase on the same input.

use chasebag::chase::{run_chase, ChaseConfig, Strategy};
use chasebag::textio::{parse_program, render_facts};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let program = parse_program(
        "rel P/1. rel R/2. rel S/2.
         S(a, c). P(a). P(b).
         S(x, y) -> R(x, y).
         P(x) -> exists y: R(x, y).",
    )?;

    let restricted = run_chase(&program, &ChaseConfig::default().with_trace())?;
    print!("{}", restricted.render_trace());
    print!("{}", render_facts(&restricted.instance));
    assert!(restricted.terminated);
    assert_eq!(restricted.instance.count_of("R"), 2);

    let oblivious = run_chase(
        &program,
        &ChaseConfig::bounded(100).with_strategy(Strategy::Oblivious),
    )?;
    println!(
        "oblivious: {} facts in {} levels",
        oblivious.instance.len(),
        oblivious.levels_run
    );
    assert_eq!(oblivious.instance.count_of("R"), 3);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
