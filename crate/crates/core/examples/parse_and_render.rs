// Parse a program and a query, then print them back.

use chasebag::textio::{parse_program, parse_query, render_program, render_query};

const PROGRAM: &str = r#"
rel Emp/1.
rel WorksIn/2.
Emp(ann).
Emp("Bob Smith").
WorksIn(ann, 42).
Emp(x) -> exists d: WorksIn(x, d).
"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let program = parse_program(PROGRAM)?;
    let text = render_program(&program);
    print!("{text}");
    assert_eq!(parse_program(&text)?, program);

    let q = parse_query(
        "q(x) <- WorksIn(x, d) | WorksIn(x, 42), Emp(x).",
        &program.schema,
    )?;
    let shown = render_query(&q);
    print!("{shown}");
    assert_eq!(parse_query(&shown, &program.schema)?, q);

    // errors carry a line and column
    let err = parse_program("rel R/1.\nR(a, b).").unwrap_err();
    println!("{err}");
    assert_eq!((err.line, err.column), (2, 1));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
