//! A seeded Monte Carlo experiment with jackknife errors and a histogram.

use randfid::analytic::mean_fidelity_2k;
use randfid::montecarlo::{run_experiment, ExperimentResult, ExperimentSpec, Statistic};
use randfid::samplers::MeasureSpec;

pub fn run_example(samples: usize) -> randfid::Result<(ExperimentResult, f64)> {
    let spec = ExperimentSpec::symmetric(MeasureSpec::HilbertSchmidt { n: 2 }, samples, 2024, Statistic::Fidelity);
    Ok((run_experiment(&spec)?, mean_fidelity_2k(2.0)?))
}

fn main() -> randfid::Result<()> {
    let (r, exact) = run_example(100_000)?;
    println!("<F> = {:.6} +- {:.6}  (exact {:.6}, z = {:+.2})", r.mean, r.stderr, exact, r.z_score(exact));
    for m in &r.moments {
        println!("  <F^{}> = {:.6} +- {:.6}", m.m, m.value, m.jackknife_error);
    }
    println!("wall time {:?}", r.wall_time);
    Ok(())
}
