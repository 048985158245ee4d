use std::io::Write;

use prodone_core::verify::{run_criterion, CRITERIA};

/// Writes through the raw handle so the lines survive the harness's output capture.
fn emit(line: &str) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    for &(id, _, _) in CRITERIA {
        let report = run_criterion(id);
        let status = if report.passed { "PASS" } else { "FAIL" };
        emit(&format!(
            "criterion {:>2}: {} {} ({} ms, limit {} ms)",
            report.id, status, report.title, report.elapsed_ms, report.limit_ms
        ));
        for failure in &report.failures {
            emit(&format!("    {failure}"));
        }
        if !report.passed {
            failed.push(report.id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
