use std::io::Write;

use mcf_core::acceptance::{run_criterion, CRITERIA};

#[test]
fn acceptance_criteria() {
    // written to the stdout handle directly so the table shows without --nocapture
    let mut out = std::io::stdout().lock();
    let mut failed = Vec::new();
    for id in 1..=CRITERIA.len() {
        let r = run_criterion(id).expect("known criterion");
        writeln!(out, "{}", r.line()).unwrap();
        if !r.passed {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
