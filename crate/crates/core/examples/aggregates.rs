// count, sum and avg over certain answers.

use chasebag::aggregate::{aggregate_certain, render_aggregate, AggregateError, AggregateSpec};
use chasebag::chase::ChaseConfig;
use chasebag::eval::EvalMode;
use chasebag::textio::{parse_program, parse_query};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let program = parse_program(
        "rel Sale/2. rel Refund/2. rel Order/1. rel Shipped/2.
         Sale(o1, 10). Sale(o2, 2.5). Refund(o3, 4).
         Order(o4).
         Refund(x, v) -> Sale(x, v).
         Order(x) -> exists d: Shipped(x, d).",
    )?;
    let config = ChaseConfig::default();
    let sales = parse_query("q(o, v) <- Sale(o, v).", &program.schema)?;
    for spec in [
        AggregateSpec::count(),
        AggregateSpec::sum(2),
        AggregateSpec::avg(2),
    ] {
        let v = aggregate_certain(&sales, &program, &spec, &config, EvalMode::PerDisjunct)?;
        println!("{}", render_aggregate(spec.func, &v));
    }

    let shipped = parse_query("q(o) <- Shipped(o, d).", &program.schema)?;
    let v = aggregate_certain(
        &shipped,
        &program,
        &AggregateSpec::count(),
        &config,
        EvalMode::PerDisjunct,
    )?;
    assert_eq!(
        render_aggregate(AggregateSpec::count().func, &v),
        "fn=count value=1/1 (1) exact=true"
    );

    let capped = ChaseConfig::bounded(0);
    let err = aggregate_certain(
        &shipped,
        &program,
        &AggregateSpec::count_distinct(),
        &capped,
        EvalMode::PerDisjunct,
    )
    .unwrap_err();
    assert_eq!(err, AggregateError::InexactInput);
    println!("{err}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
