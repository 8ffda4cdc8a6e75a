use xtorsion::acceptance::{run_suite, SuiteOptions, TOTAL_BUDGET};

#[test]
fn acceptance_criteria() {
    let report = run_suite(&SuiteOptions::default());
    for c in &report.criteria {
        println!("{}", c.line());
    }
    println!("total {:.3} s / {} s", report.elapsed.as_secs_f64(), TOTAL_BUDGET.as_secs());
    let failed: Vec<String> = report
        .criteria
        .iter()
        .filter(|c| !c.passed || !c.within_budget())
        .map(|c| format!("{} {}: {:?}", c.id, c.name, c.failures.iter().take(3).collect::<Vec<_>>()))
        .collect();
    assert!(failed.is_empty(), "failing criteria: {failed:#?}");
    assert!(report.within_budget);
}
