//! Acceptance battery at full sample sizes. Each criterion is its own test,
//! so the harness prints one ok/FAILED line per criterion; the detailed
//! report line goes to stdout (visible with --nocapture or on failure).

use randfid::verify::{run_criterion, Suite, VerifyOptions};

fn criterion(id: u8) {
    let opts = VerifyOptions { suite: Suite::Full, seed: 1, tol_scale: 1.0 };
    let r = run_criterion(id, &opts);
    println!("{}", r.line());
    let failed: Vec<String> = r.checks.iter().filter(|c| !c.passed).map(|c| format!("{} ({})", c.name, c.detail)).collect();
    for f in &failed {
        println!("    failed: {f}");
    }
    assert!(r.passed(), "{}\n{}", r.line(), failed.join("\n"));
}

#[test]
fn criterion_1_closed_form_constants() {
    criterion(1);
}

#[test]
fn criterion_2_route_cross_validation() {
    criterion(2);
}

#[test]
fn criterion_3_monte_carlo_vs_analytic_means() {
    criterion(3);
}

#[test]
fn criterion_4_distribution_goodness_of_fit() {
    criterion(4);
}

#[test]
fn criterion_5_w_pipeline() {
    criterion(5);
}

#[test]
fn criterion_6_asymptotics() {
    criterion(6);
}

#[test]
fn criterion_7_property_suites() {
    criterion(7);
}

#[test]
fn criterion_8_figure_data() {
    criterion(8);
}
