//! Acceptance gates A1–A14, one line per gate.
//!
//! Runs at desk scale; `NVLAB_ACCEPTANCE_SCALE=reference` selects the
//! reference resolution and `NVLAB_ACCEPTANCE_GATES=A1,A5` a subset.

use std::process::ExitCode;

use nvlab::validation::{Scale, Suite};

fn main() -> ExitCode {
    let scale = match std::env::var("NVLAB_ACCEPTANCE_SCALE").as_deref() {
        Ok("reference") => Scale::REFERENCE,
        Ok("desk") | Err(_) => Scale::DESK,
        Ok(other) => {
            eprintln!("unknown NVLAB_ACCEPTANCE_SCALE {other:?}; use desk or reference");
            return ExitCode::FAILURE;
        }
    };
    let selected: Vec<String> = match std::env::var("NVLAB_ACCEPTANCE_GATES") {
        Ok(list) => list
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect(),
        Err(_) => Suite::ids().map(String::from).collect(),
    };
    println!(
        "acceptance at n = {}, L = {}, nk = {}, K = {}",
        scale.n, scale.half_width, scale.nk, scale.k_half
    );
    let suite = Suite::new(scale);
    let mut failed = 0;
    for id in &selected {
        let Some(gate) = suite.run(id) else {
            println!("{id:<4} FAIL  unknown gate");
            failed += 1;
            continue;
        };
        println!("{}", gate.line());
        if !gate.passed {
            for f in gate.failures.iter().skip(1) {
                println!("       {f}");
            }
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        selected.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
