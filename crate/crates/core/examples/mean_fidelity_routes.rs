//! Mean fidelity of two induced states computed by every available route.

use randfid::analytic::{mean_fidelity_2k, mean_fidelity_nk, mean_root_fidelity_nk, moment_root_fidelity_series, SeriesConfig};

/// (N, K, closed-form <F>, series <F>, X-route <sqrt F>, series <sqrt F>)
pub fn run_example() -> randfid::Result<Vec<(usize, f64, f64, f64, f64, f64)>> {
    let cfg = SeriesConfig::default();
    let mut rows = Vec::new();
    for (n, k) in [(2, 2.0), (2, 1.5), (3, 3.0), (3, 2.0), (4, 6.0)] {
        let closed = if n == 2 { mean_fidelity_2k(k)? } else { mean_fidelity_nk(n, k)? };
        let t = moment_root_fidelity_series(n, k, 2, &cfg)?;
        rows.push((n, k, closed, t.get(2).unwrap_or(f64::NAN), mean_root_fidelity_nk(n, k)?, t.get(1).unwrap_or(f64::NAN)));
    }
    Ok(rows)
}

fn main() -> randfid::Result<()> {
    println!("{:>3} {:>5} {:>16} {:>16} {:>16} {:>16}", "N", "K", "<F> closed", "<F> series", "<sqrtF> X", "<sqrtF> series");
    for (n, k, a, b, c, d) in run_example()? {
        println!("{n:>3} {k:>5} {a:>16.12} {b:>16.12} {c:>16.12} {d:>16.12}");
    }
    Ok(())
}
