// Level caps give lower bounds that grow with the cap.

use chasebag::chase::ChaseConfig;
use chasebag::eval::{evaluate_certain_bag, EvalMode};
use chasebag::model::Exactness;
use chasebag::textio::{parse_program, parse_query};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/slow_chase.idb");
    let program = parse_program(&std::fs::read_to_string(path)?)?;
    let q = parse_query("q(x) <- S0(x, y) | R2(x).", &program.schema)?;
    let mut last = 0u32.into();
    for cap in [1, 5, 25, 125, 1000] {
        let bag = evaluate_certain_bag(
            &q,
            &program,
            &ChaseConfig::bounded(cap),
            EvalMode::PerDisjunct,
        )?;
        println!(
            "cap {cap:>4}: {} answers ({})",
            bag.total(),
            bag.exactness()
        );
        assert!(bag.total() >= last);
        last = bag.total();
        if cap == 1000 {
            assert_eq!(bag.exactness(), Exactness::Exact);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
