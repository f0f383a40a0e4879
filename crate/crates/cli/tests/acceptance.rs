//! Acceptance criteria 1 to 10, one PASS/FAIL line each.

use std::io::Write;

use cavity_relax_cli::verify::{run_suite, VerifyOptions};

#[test]
fn acceptance_criteria() {
    let started = std::time::Instant::now();
    let checks = run_suite(&VerifyOptions::default());
    // written past the test harness's capture so the table shows in every run
    let mut out = std::io::stdout().lock();
    for c in &checks {
        writeln!(out, "{}", c.line()).unwrap();
    }
    writeln!(out, "acceptance suite finished in {:.1} s", started.elapsed().as_secs_f64()).unwrap();
    assert_eq!(checks.len(), 10);
    let failed: Vec<u8> = checks.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
