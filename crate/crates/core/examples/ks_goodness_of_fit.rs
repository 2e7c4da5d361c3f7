//! Kolmogorov-Smirnov test of sampled fidelities against an exact law.

use randfid::analytic::beta_cdf;
use randfid::montecarlo::{run_experiment, ExperimentSpec, KsResult, Statistic};
use randfid::samplers::MeasureSpec;

/// Pure vs induced (N, K) fidelity is Beta(K, (N-1)K).
pub fn run_example(n: usize, k: usize, samples: usize) -> randfid::Result<KsResult> {
    let spec = ExperimentSpec::new(MeasureSpec::FubiniStudyPure { n }, MeasureSpec::Induced { n, k }, samples, 5, Statistic::Fidelity);
    let (a, b) = (k as f64, ((n - 1) * k) as f64);
    let r = run_experiment(&spec)?.with_ks(|f| beta_cdf(a, b, f))?;
    Ok(r.ks_vs_reference.expect("ks attached"))
}

fn main() -> randfid::Result<()> {
    for (n, k) in [(2, 2), (3, 3), (4, 1)] {
        let ks = run_example(n, k, 50_000)?;
        println!("pure vs induced({n},{k}): D = {:.5}, p = {:.3}, n = {}", ks.d, ks.p_value, ks.n);
    }
    Ok(())
}
