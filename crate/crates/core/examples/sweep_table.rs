//! Grid of Monte Carlo vs exact mean fidelities over (N, K).

use randfid::montecarlo::{sweep, Statistic, SweepRow};

pub fn run_example(samples: usize) -> randfid::Result<Vec<SweepRow>> {
    sweep(&[2, 3, 4], &[1, 2, 3, 4], Statistic::Fidelity, samples, 9)
}

fn main() -> randfid::Result<()> {
    println!("{:>2} {:>2} {:>10} {:>10} {:>10} {:>7}", "N", "K", "mc", "stderr", "exact", "z");
    for r in run_example(20_000)? {
        let z = (r.mc_mean - r.analytic) / r.mc_stderr;
        println!("{:>2} {:>2} {:>10.6} {:>10.6} {:>10.6} {:>7.2}", r.n, r.k, r.mc_mean, r.mc_stderr, r.analytic, z);
    }
    Ok(())
}
