//! Bures-distributed spectra via Metropolis-Hastings, with acceptance and effective sample size.

use randfid::samplers::{effective_sample_size, BuresChain, BuresMcmcConfig, RngStream};

pub struct ChainStats {
    pub acceptance: f64,
    pub ess: f64,
    pub mean_purity: f64,
}

pub fn run_example(n: usize, draws: usize) -> randfid::Result<ChainStats> {
    let mut rng = RngStream::new(3, 0).rng();
    let mut chain = BuresChain::new(n, BuresMcmcConfig::default(), &mut rng)?;
    let purities: Vec<f64> = (0..draws).map(|_| chain.next_spectrum(&mut rng).iter().map(|l| l * l).sum()).collect();
    Ok(ChainStats {
        acceptance: chain.acceptance_rate(),
        ess: effective_sample_size(&purities),
        mean_purity: purities.iter().sum::<f64>() / draws as f64,
    })
}

fn main() -> randfid::Result<()> {
    for n in 2..=5 {
        let s = run_example(n, 20_000)?;
        println!("N = {n}: acceptance {:.3}, ESS {:.0}, <Tr rho^2> {:.4}", s.acceptance, s.ess, s.mean_purity);
    }
    Ok(())
}
