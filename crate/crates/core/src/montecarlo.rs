//! Seeded, parallel fidelity experiments between two independently sampled
//! states: means, raw moments with jackknife errors, histograms and
//! Kolmogorov–Smirnov statistics.
//!
//! Sample i draws from ChaCha8 stream i, so results do not depend on how the
//! work is split across threads. Bures states with N ≥ 3 come from Markov
//! chains instead; each block of [`BLOCK`] samples runs its own chain on a
//! stream id with the top bit set.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{moment_root_fidelity_series, Provenance, SeriesConfig};
use crate::curve::DistributionCurve;
use crate::error::{Error, Result};
use crate::samplers::{effective_sample_size, sample_measure, BuresChain, BuresMcmcConfig, MeasureSpec, RngStream};
use crate::state::{fidelity, fidelity_max_mixed, root_fidelity, DensityMatrix};

/// Samples per parallel work unit (and per Bures chain).
pub const BLOCK: usize = 1000;
const JACKKNIFE_BLOCKS: usize = 100;
const CHAIN_STREAM_BIT: u64 = 1 << 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Fidelity,
    RootFidelity,
    /// F(ρ_a, 1/N) = (Tr√ρ_a)²/N; measure_b is not sampled.
    MaxMixedFidelity,
    /// √F(ρ_a, 1/N) = Tr√ρ_a/√N; measure_b is not sampled.
    MaxMixedRootFidelity,
    /// Tr ρ_a²; measure_b is not sampled.
    Purity,
}

impl Statistic {
    pub fn uses_second_state(&self) -> bool {
        matches!(self, Statistic::Fidelity | Statistic::RootFidelity)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Statistic::Fidelity => "fidelity",
            Statistic::RootFidelity => "root_fidelity",
            Statistic::MaxMixedFidelity => "max_mixed_fidelity",
            Statistic::MaxMixedRootFidelity => "max_mixed_root_fidelity",
            Statistic::Purity => "purity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub measure_a: MeasureSpec,
    pub measure_b: MeasureSpec,
    pub n_samples: usize,
    pub seed: u64,
    pub statistic: Statistic,
    pub histogram_bins: usize,
    pub bures: BuresMcmcConfig,
}

impl ExperimentSpec {
    pub fn new(measure_a: MeasureSpec, measure_b: MeasureSpec, n_samples: usize, seed: u64, statistic: Statistic) -> Self {
        ExperimentSpec { measure_a, measure_b, n_samples, seed, statistic, histogram_bins: 100, bures: BuresMcmcConfig::default() }
    }

    /// Both states from the same measure.
    pub fn symmetric(m: MeasureSpec, n_samples: usize, seed: u64, statistic: Statistic) -> Self {
        Self::new(m, m, n_samples, seed, statistic)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidSpec("n_samples must be at least 1".into()));
        }
        if self.histogram_bins == 0 {
            return Err(Error::InvalidSpec("histogram_bins must be at least 1".into()));
        }
        self.measure_a.validate()?;
        if self.statistic.uses_second_state() {
            self.measure_b.validate()?;
            if self.measure_a.dim() != self.measure_b.dim() {
                return Err(Error::DimMismatch(self.measure_a.dim(), self.measure_b.dim()));
            }
        }
        self.bures.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub m: u32,
    pub value: f64,
    pub jackknife_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub statistic: Statistic,
    pub n_samples: usize,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
    pub moments: Vec<MomentEstimate>,
    pub histogram: DistributionCurve,
    pub ks_vs_reference: Option<KsResult>,
    /// Seconds; not serialized so that identical specs give identical bytes.
    #[serde(skip)]
    pub wall_time: f64,
    #[serde(skip)]
    pub samples: Vec<f64>,
}

impl ExperimentResult {
    /// Attach a KS test of the stored samples against `cdf`.
    pub fn with_ks<F: Fn(f64) -> f64>(mut self, cdf: F) -> Result<Self> {
        self.ks_vs_reference = Some(ks_statistic(&self.samples, cdf)?);
        Ok(self)
    }

    /// |mean − reference| in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.mean - reference).abs() / self.stderr
    }
}

struct Side {
    spec: MeasureSpec,
    chain: bool,
}

impl Side {
    fn new(spec: MeasureSpec) -> Self {
        let chain = matches!(spec, MeasureSpec::Bures { n } if n >= 3);
        Side { spec, chain }
    }
}

fn statistic_value(stat: Statistic, a: &DensityMatrix, b: Option<&DensityMatrix>) -> Result<f64> {
    Ok(match stat {
        Statistic::Fidelity => fidelity(a, b.expect("second state"))?,
        Statistic::RootFidelity => root_fidelity(a, b.expect("second state"))?,
        Statistic::MaxMixedFidelity => fidelity_max_mixed(a),
        Statistic::MaxMixedRootFidelity => fidelity_max_mixed(a).sqrt(),
        Statistic::Purity => a.purity(),
    })
}

fn run_block(spec: &ExperimentSpec, sides: &[Side], block: usize) -> Result<Vec<f64>> {
    let start = block * BLOCK;
    let end = (start + BLOCK).min(spec.n_samples);
    let mut chains = Vec::with_capacity(sides.len());
    for (j, side) in sides.iter().enumerate() {
        if side.chain {
            let mut rng = RngStream::new(spec.seed, CHAIN_STREAM_BIT | (2 * block + j) as u64).rng();
            let ch = BuresChain::new(side.spec.dim(), spec.bures, &mut rng)?;
            chains.push(Some((ch, rng, Vec::with_capacity(end - start))));
        } else {
            chains.push(None);
        }
    }
    let mut out = Vec::with_capacity(end - start);
    for i in start..end {
        let mut rng = RngStream::new(spec.seed, i as u64).rng();
        let mut states = Vec::with_capacity(2);
        for (side, ch) in sides.iter().zip(chains.iter_mut()) {
            let st = match ch {
                Some((chain, crng, trace)) => {
                    let s = chain.next_state(crng)?;
                    trace.push(s.trace_sqrt());
                    s
                }
                None => sample_measure(&side.spec, &mut rng, &spec.bures)?,
            };
            states.push(st);
        }
        out.push(statistic_value(spec.statistic, &states[0], states.get(1))?);
    }
    for (_, _, trace) in chains.into_iter().flatten() {
        if trace.len() >= 200 {
            let ess = effective_sample_size(&trace);
            let threshold = 0.05 * trace.len() as f64;
            if ess < threshold {
                return Err(Error::McmcNotConverged { ess, threshold });
            }
        }
    }
    Ok(out)
}

/// Draw the per-sample statistic values in sample-index order.
pub fn sample_statistic(spec: &ExperimentSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut sides = vec![Side::new(spec.measure_a)];
    if spec.statistic.uses_second_state() {
        sides.push(Side::new(spec.measure_b));
    }
    let blocks = spec.n_samples.div_ceil(BLOCK);
    let parts: Vec<Vec<f64>> = (0..blocks).into_par_iter().map(|b| run_block(spec, &sides, b)).collect::<Result<_>>()?;
    Ok(parts.concat())
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let t0 = Instant::now();
    let samples = sample_statistic(spec)?;
    let n = samples.len();
    let mean = pairwise_sum(&samples) / n as f64;
    let dev: Vec<f64> = samples.iter().map(|x| (x - mean).powi(2)).collect();
    let stderr = if n >= 2 { (pairwise_sum(&dev) / (n - 1) as f64 / n as f64).sqrt() } else { f64::NAN };
    let moments = (1..=4).map(|m| jackknife_moment(&samples, m)).collect();
    let histogram = histogram(&samples, spec.histogram_bins, &format!("mc {} {} vs {}", spec.statistic.as_str(), spec.measure_a.label(), spec.measure_b.label()));
    Ok(ExperimentResult {
        statistic: spec.statistic,
        n_samples: n,
        seed: spec.seed,
        mean,
        stderr,
        moments,
        histogram,
        ks_vs_reference: None,
        wall_time: t0.elapsed().as_secs_f64(),
        samples,
    })
}

/// Pairwise summation in a fixed order.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 16 {
        return x.iter().sum();
    }
    let (a, b) = x.split_at(x.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Raw moment E[x^m] with a delete-one-block jackknife error over
/// contiguous blocks.
pub fn jackknife_moment(x: &[f64], m: u32) -> MomentEstimate {
    let p: Vec<f64> = x.iter().map(|v| v.powi(m as i32)).collect();
    let n = p.len();
    let total = pairwise_sum(&p);
    let value = total / n as f64;
    let nb = JACKKNIFE_BLOCKS.min(n);
    if nb < 2 {
        return MomentEstimate { m, value, jackknife_error: f64::NAN };
    }
    let bounds: Vec<usize> = (0..=nb).map(|j| j * n / nb).collect();
    let loo: Vec<f64> = (0..nb)
        .map(|j| {
            let s = pairwise_sum(&p[bounds[j]..bounds[j + 1]]);
            (total - s) / (n - (bounds[j + 1] - bounds[j])) as f64
        })
        .collect();
    let mbar = loo.iter().sum::<f64>() / nb as f64;
    let var = loo.iter().map(|v| (v - mbar).powi(2)).sum::<f64>() * (nb - 1) as f64 / nb as f64;
    MomentEstimate { m, value, jackknife_error: var.sqrt() }
}

/// Density histogram on uniform bins of [0, 1] (values at 1 land in the last bin).
pub fn histogram(x: &[f64], bins: usize, label: &str) -> DistributionCurve {
    let mut counts = vec![0u64; bins];
    for &v in x {
        let i = ((v.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let n = x.len().max(1) as f64;
    let w = 1.0 / bins as f64;
    let centers: Vec<f64> = (0..bins).map(|i| (i as f64 + 0.5) * w).collect();
    let pdf = counts.iter().map(|&c| c as f64 / (n * w)).collect();
    let err = counts.iter().map(|&c| (c as f64).sqrt() / (n * w)).collect();
    let mut c = DistributionCurve::new(label, centers, pdf, Provenance::MonteCarlo);
    c.pdf_err = Some(err);
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Two-sided one-sample KS statistic against `cdf`, with the asymptotic
/// Kolmogorov p-value (Stephens' small-n correction).
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let c = cdf(v);
        d = d.max((i as f64 + 1.0) / n - c).max(c - i as f64 / n);
    }
    let sn = n.sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    Ok(KsResult { d, p_value: kolmogorov_q(lambda), n: x.len() })
}

/// Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²λ²).
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let t = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { t } else { -t };
        if t < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub k: usize,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub analytic: f64,
    pub provenance: Provenance,
}

/// ⟨F⟩ (or ⟨√F⟩) for symmetric induced pairs over an (N, K) grid, MC next
/// to the exact moment. Each cell uses seed + its row-major index.
pub fn sweep(ns: &[usize], ks: &[usize], statistic: Statistic, n_samples: usize, seed: u64) -> Result<Vec<SweepRow>> {
    let m = match statistic {
        Statistic::Fidelity => 2,
        Statistic::RootFidelity => 1,
        s => return Err(Error::InvalidSpec(format!("sweep does not support {}", s.as_str()))),
    };
    let mut rows = Vec::with_capacity(ns.len() * ks.len());
    for (i, &n) in ns.iter().enumerate() {
        for (j, &k) in ks.iter().enumerate() {
            let table = moment_root_fidelity_series(n, k as f64, m, &SeriesConfig::default())?;
            let entry = table.entry(m).ok_or_else(|| Error::InvalidSpec("missing moment".into()))?;
            let cell_seed = seed.wrapping_add((i * ks.len() + j) as u64);
            let mc = if n_samples > 0 {
                let r = run_experiment(&ExperimentSpec::symmetric(MeasureSpec::Induced { n, k }, n_samples, cell_seed, statistic))?;
                (r.mean, r.stderr)
            } else {
                (f64::NAN, f64::NAN)
            };
            rows.push(SweepRow { n, k, mc_mean: mc.0, mc_stderr: mc.1, analytic: entry.value, provenance: entry.provenance });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive() {
        let x: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        assert!((pairwise_sum(&x) - x.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn kolmogorov_tail() {
        // classic critical values
        assert!((kolmogorov_q(1.3581) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_q(1.6276) - 0.01).abs() < 1e-3);
    }

    #[test]
    fn ks_on_uniform_grid_is_small() {
        let x: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let r = ks_statistic(&x, |v| v).unwrap();
        assert!(r.d <= 0.0005 + 1e-12 && r.p_value > 0.99);
        assert_eq!(ks_statistic(&[], |v| v), Err(Error::EmptySample));
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let spec = ExperimentSpec::symmetric(MeasureSpec::Induced { n: 2, k: 2 }, 2500, 7, Statistic::Fidelity);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_experiment(&spec)).unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| run_experiment(&spec)).unwrap();
        assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&four).unwrap());
    }

    #[test]
    fn histogram_mass_is_one() {
        let x = [0.0, 0.2, 0.5, 1.0, 0.99];
        let h = histogram(&x, 10, "t");
        let mass: f64 = h.pdf.iter().map(|p| p * 0.1).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }
}
