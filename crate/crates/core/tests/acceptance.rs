//! Acceptance battery: one line per criterion, non-zero exit on any failure.
//! Criterion 1 uses the grid oracle from `common`. Criterion 12 reruns
//! criteria 1 to 11 and requires identical serialized results.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use osgt::suite::{run_checks, CriterionResult, SuiteConfig};

fn main() -> ExitCode {
    let cfg = SuiteConfig::default();
    let oracle = |w: &osgt::opspace::TensorRep| Ok(common::haagerup_grid_oracle(w));
    let start = Instant::now();
    let (first, timings) = run_checks(&cfg, &oracle).expect("battery runs");
    for c in &first {
        println!("{}  [{:.1}s]", c.line(), timings.get(&c.id).copied().unwrap_or(0.0));
    }
    let (second, _) = run_checks(&cfg, &oracle).expect("battery reruns");
    let a = serde_json::to_string(&first).unwrap();
    let b = serde_json::to_string(&second).unwrap();
    let repro = CriterionResult::new(
        12,
        "bit-for-bit reproducibility",
        a == b,
        format!("second run of criteria 1-11 identical: {}", a == b),
        &[("identical", f64::from(u8::from(a == b)))],
    );
    println!("{}", repro.line());
    let failed = first.iter().chain([&repro]).filter(|c| !c.passed).count();
    println!("acceptance: {} of 12 passed in {:.1}s", 12 - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
