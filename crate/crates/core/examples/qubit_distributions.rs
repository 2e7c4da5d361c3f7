//! Closed-form fidelity densities for qubit pairs and pure-state families.

use randfid::analytic::{pdf_fidelity_2k_asymptotic, pdf_fidelity_2k_closed, pdf_pure_hs, pdf_pure_induced, pdf_pure_pure};
use randfid::curve::midpoint_grid;

/// Rows of (F, pure-pure N=3, pure-induced N=3 K=4, pure-HS N=2, qubit pair K=3/2, qubit pair K=10, its asymptotic form).
pub fn run_example(grid: usize) -> randfid::Result<Vec<[f64; 7]>> {
    midpoint_grid(grid)
        .into_iter()
        .map(|f| {
            Ok([
                f,
                pdf_pure_pure(3, f)?,
                pdf_pure_induced(3, 4.0, f)?,
                pdf_pure_hs(2, f)?,
                pdf_fidelity_2k_closed(f, 1.5)?,
                pdf_fidelity_2k_closed(f, 10.0)?,
                pdf_fidelity_2k_asymptotic(f, 10.0)?,
            ])
        })
        .collect()
}

fn main() -> randfid::Result<()> {
    println!("F,pure_pure_3,pure_induced_3_4,pure_hs_2,pair_k1.5,pair_k10,pair_k10_asym");
    for r in run_example(20)? {
        println!("{}", r.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(","));
    }
    Ok(())
}
