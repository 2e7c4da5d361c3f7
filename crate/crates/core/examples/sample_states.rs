//! Draw one state from each measure and print its spectrum.

use randfid::samplers::{sample_measure, BuresMcmcConfig, MeasureSpec, RngStream};
use randfid::state::DensityMatrix;

pub fn run_example() -> randfid::Result<Vec<(String, DensityMatrix)>> {
    let mut rng = RngStream::new(7, 0).rng();
    let cfg = BuresMcmcConfig::default();
    let measures = [
        MeasureSpec::FubiniStudyPure { n: 3 },
        MeasureSpec::Induced { n: 3, k: 5 },
        MeasureSpec::HilbertSchmidt { n: 3 },
        MeasureSpec::Bures { n: 3 },
        MeasureSpec::RealInduced { n: 2, k: 2 },
    ];
    measures.iter().map(|m| Ok((m.label(), sample_measure(m, &mut rng, &cfg)?))).collect()
}

fn main() -> randfid::Result<()> {
    for (label, rho) in run_example()? {
        println!("{label:<24} trace {:.12}  purity {:.4}  eigenvalues {:?}", rho.trace(), rho.purity(), rho.eigenvalues());
    }
    Ok(())
}
