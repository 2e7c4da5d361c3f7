//! Fidelity, root fidelity and the derived distances for a pair of random states.

use randfid::samplers::{sample_hs, sample_pure, RngStream};
use randfid::state::{bures_angle, bures_distance, fidelity, fidelity_max_mixed, fidelity_n2, fidelity_pure_mixed, hs_distance, root_fidelity};

pub struct Metrics {
    pub fidelity: f64,
    pub root_fidelity: f64,
    pub qubit_shortcut: f64,
    pub bures_distance: f64,
    pub bures_angle: f64,
    pub hs_distance: f64,
    pub max_mixed: f64,
    pub pure_vs_mixed: (f64, f64),
}

pub fn run_example() -> randfid::Result<Metrics> {
    let mut rng = RngStream::new(11, 0).rng();
    let a = sample_hs(2, &mut rng)?;
    let b = sample_hs(2, &mut rng)?;
    let psi = sample_pure(2, &mut rng);
    Ok(Metrics {
        fidelity: fidelity(&a, &b)?,
        root_fidelity: root_fidelity(&a, &b)?,
        qubit_shortcut: fidelity_n2(&a, &b)?,
        bures_distance: bures_distance(&a, &b)?,
        bures_angle: bures_angle(&a, &b)?,
        hs_distance: hs_distance(&a, &b)?,
        max_mixed: fidelity_max_mixed(&a),
        pure_vs_mixed: (fidelity_pure_mixed(&psi, &a)?, fidelity(&psi.projector(), &a)?),
    })
}

fn main() -> randfid::Result<()> {
    let m = run_example()?;
    println!("F = {:.12}  (qubit formula {:.12})", m.fidelity, m.qubit_shortcut);
    println!("sqrt F = {:.12}", m.root_fidelity);
    println!("Bures distance {:.6}, angle {:.6}, HS distance {:.6}", m.bures_distance, m.bures_angle, m.hs_distance);
    println!("F(rho, 1/N) = {:.6}", m.max_mixed);
    println!("<psi|rho|psi> = {:.12} vs general formula {:.12}", m.pure_vs_mixed.0, m.pure_vs_mixed.1);
    Ok(())
}
