//! Every example runs and produces sensible numbers.

#[allow(dead_code)]
#[path = "../examples/sample_states.rs"]
mod sample_states;
#[allow(dead_code)]
#[path = "../examples/fidelity_metrics.rs"]
mod fidelity_metrics;
#[allow(dead_code)]
#[path = "../examples/mean_fidelity_routes.rs"]
mod mean_fidelity_routes;
#[allow(dead_code)]
#[path = "../examples/series_moments.rs"]
mod series_moments;
#[allow(dead_code)]
#[path = "../examples/qubit_distributions.rs"]
mod qubit_distributions;
#[allow(dead_code)]
#[path = "../examples/pure_bures_quadrature.rs"]
mod pure_bures_quadrature;
#[allow(dead_code)]
#[path = "../examples/w_pipeline.rs"]
mod w_pipeline;
#[allow(dead_code)]
#[path = "../examples/monte_carlo_experiment.rs"]
mod monte_carlo_experiment;
#[allow(dead_code)]
#[path = "../examples/ks_goodness_of_fit.rs"]
mod ks_goodness_of_fit;
#[allow(dead_code)]
#[path = "../examples/sweep_table.rs"]
mod sweep_table;
#[allow(dead_code)]
#[path = "../examples/gauge_alpha.rs"]
mod gauge_alpha;
#[allow(dead_code)]
#[path = "../examples/bures_mcmc.rs"]
mod bures_mcmc;

#[test]
fn samples_are_states() {
    for (_, rho) in sample_states::run_example().unwrap() {
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!(rho.eigenvalues().iter().all(|&l| l > -1e-12));
    }
}

#[test]
fn metrics_agree() {
    let m = fidelity_metrics::run_example().unwrap();
    assert!((m.fidelity - m.qubit_shortcut).abs() < 1e-12);
    assert!((m.root_fidelity.powi(2) - m.fidelity).abs() < 1e-12);
    assert!((m.pure_vs_mixed.0 - m.pure_vs_mixed.1).abs() < 1e-10);
}

#[test]
fn routes_agree() {
    for (_, _, closed, series, xroute, sroot) in mean_fidelity_routes::run_example().unwrap() {
        assert!((closed - series).abs() < 1e-10);
        assert!((xroute - sroot).abs() < 1e-10);
        assert!(closed <= sroot);
    }
}

#[test]
fn series_tables_consistent() {
    for t in series_moments::run_example().unwrap() {
        assert!(t.is_consistent(1e-12));
        assert_eq!(t.get(0), Some(1.0));
    }
}

#[test]
fn qubit_curves_normalized() {
    let rows = qubit_distributions::run_example(400).unwrap();
    for col in 1..6 {
        let mass: f64 = rows.iter().map(|r| r[col]).sum::<f64>() / 400.0;
        assert!((mass - 1.0).abs() < 1e-3, "column {col}: {mass}");
    }
}

#[test]
fn pure_bures_normalized() {
    let c = pure_bures_quadrature::run_example(3, 400).unwrap();
    let mass: f64 = c.pdf.iter().sum::<f64>() / 400.0;
    assert!((mass - 1.0).abs() < 1e-3);
}

#[test]
fn w_pipeline_matches_series() {
    let w = w_pipeline::run_example(3, 3).unwrap();
    assert!((w.normalization - 1.0).abs() < 0.01);
    assert!((w.mean_root.0 - w.mean_root.1).abs() < 1e-6);
    assert!((w.mean_f.0 - w.mean_f.1).abs() < 1e-6);
}

#[test]
fn mc_experiment_within_4_sigma() {
    let (r, exact) = monte_carlo_experiment::run_example(50_000).unwrap();
    assert!(r.z_score(exact).abs() < 4.0);
}

#[test]
fn ks_accepts_true_law() {
    let ks = ks_goodness_of_fit::run_example(3, 3, 20_000).unwrap();
    assert!(ks.p_value > 0.01);
}

#[test]
fn sweep_within_4_sigma() {
    for r in sweep_table::run_example(5_000).unwrap() {
        assert!(((r.mc_mean - r.analytic) / r.mc_stderr).abs() < 4.0);
    }
}

#[test]
fn gauge_rows() {
    let rows = gauge_alpha::run_example().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|g| g.alpha.is_finite() && g.mean_f2 < g.mean_f));
}

#[test]
fn bures_chain_mixes() {
    let s = bures_mcmc::run_example(3, 5_000).unwrap();
    assert!(s.acceptance > 0.1 && s.acceptance < 0.95);
    assert!(s.ess > 500.0);
    // Bures average purity (5N² + 1) / (2N(N² + 2))
    assert!((s.mean_purity - 46.0 / 66.0).abs() < 0.02, "{}", s.mean_purity);
}
