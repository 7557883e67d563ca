// Compile the dependencies into the query and compare with the chase.

use chasebag::chase::ChaseConfig;
use chasebag::eval::{evaluate_certain_bag, EvalMode};
use chasebag::oracle::diff_bags;
use chasebag::rewrite::{evaluate_via_rewriting, perfect_rewrite};
use chasebag::textio::{parse_program, parse_query, render_query};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let program = parse_program(
        "rel Person/1. rel Emp/1. rel Manager/1. rel WorksIn/2.
         Manager(cat). Emp(ann). WorksIn(ann, sales). Person(dan).
         Manager(x) -> Emp(x).
         Emp(x) -> Person(x).
         Emp(x) -> exists d: WorksIn(x, d).",
    )?;
    let q = parse_query("q(x) <- Person(x) | WorksIn(x, d).", &program.schema)?;
    let rw = perfect_rewrite(&q, &program.dependencies);
    print!("{}", render_query(&rw.query));
    println!(
        "{} disjuncts after {} rounds",
        rw.query.disjuncts().len(),
        rw.iterations
    );

    let by_rewriting = evaluate_via_rewriting(&q, &program, EvalMode::PerDisjunct)?;
    let by_chase =
        evaluate_certain_bag(&q, &program, &ChaseConfig::default(), EvalMode::PerDisjunct)?;
    assert!(by_rewriting.same_keys(&by_chase));
    // WorksIn(ann, sales) and the TGD disjunct Emp(x) both count for ann
    for d in diff_bags(&by_chase, &by_rewriting, "chase vs rewrite")? {
        println!("{d}");
    }

    // merging the two Assign atoms fixes x, which the output keeps as a binding
    let program = parse_program(
        "rel Proj/1. rel Assign/3.
         Proj(apollo).
         Proj(x) -> exists p, r: Assign(x, p, r).",
    )?;
    let q = parse_query(
        r#"q(x) <- Assign(x, p, r), Assign("apollo", p, s)."#,
        &program.schema,
    )?;
    print!(
        "{}",
        render_query(&perfect_rewrite(&q, &program.dependencies).query)
    );
    let bag = evaluate_via_rewriting(&q, &program, EvalMode::PerDisjunct)?;
    assert_eq!(bag.len(), 1);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
