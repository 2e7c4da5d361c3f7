//! Moments <F^{m/2}> from the generating-function series, with their provenance.

use randfid::analytic::{moment_root_fidelity_series, MomentTable, SeriesConfig};

pub fn run_example() -> randfid::Result<Vec<MomentTable>> {
    let cfg = SeriesConfig::default();
    [(2, 2.0), (3, 2.0), (3, 2.5), (4, 3.5), (3, 4.0)].iter().map(|&(n, k)| moment_root_fidelity_series(n, k, 6, &cfg)).collect()
}

fn main() -> randfid::Result<()> {
    for t in run_example()? {
        println!("N = {}, K = {}", t.n, t.k);
        for e in &t.entries {
            println!("  m = {}  {:.15}  (err {:.1e}, {})", e.m, e.value, e.error, e.provenance.as_str());
        }
    }
    Ok(())
}
