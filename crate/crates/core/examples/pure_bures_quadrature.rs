//! Density of F between a pure state and a Bures-distributed state, by quadrature.

use randfid::analytic::Provenance;
use randfid::curve::{midpoint_grid, DistributionCurve};
use randfid::distnum::pdf_pure_bures;
use randfid::quad::QuadConfig;

pub fn run_example(n: usize, grid: usize) -> randfid::Result<DistributionCurve> {
    let cfg = QuadConfig::default();
    let f = midpoint_grid(grid);
    let pdf = f.iter().map(|&x| pdf_pure_bures(n, x, &cfg)).collect::<randfid::Result<Vec<_>>>()?;
    Ok(DistributionCurve::new(format!("pure-bures(N={n})"), f, pdf, Provenance::Quadrature))
}

fn main() -> randfid::Result<()> {
    for n in 2..=4 {
        let c = run_example(n, 200)?;
        let peak = c.f.iter().zip(&c.pdf).fold((0.0, 0.0), |m, (&f, &p)| if p > m.1 { (f, p) } else { m });
        println!("{}: mass {:.6}, peak at F = {:.3} (pdf {:.4})", c.label, c.trapezoid_mass(), peak.0, peak.1);
    }
    Ok(())
}
