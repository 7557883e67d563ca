// Drive the command line in-process.

use chasebag::cli::run_with_env;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let fixture = |name: &str| format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    let (input, query) = (fixture("id_chain.idb"), fixture("q1.uq"));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with_env(
        [
            "chasebag", "answer", "-i", &input, "-q", &query, "--mode", "both",
        ],
        None,
        &mut out,
        &mut err,
    );
    print!("{}", String::from_utf8(out)?);
    assert_eq!(code, 0);

    let mut out = Vec::new();
    let tower = fixture("tgd_tower.idb");
    let code = run_with_env(
        ["chasebag", "chase", "-i", &tower],
        Some("3"),
        &mut out,
        &mut err,
    );
    let text = String::from_utf8(out)?;
    assert_eq!(code, 0);
    assert!(text.ends_with("levels=3 terminated=false facts=4\n"));
    print!("{text}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
