//! Random pure states, Haar unitaries and density matrices under the
//! induced, Hilbert–Schmidt, Bures and real-induced measures.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::ln_gamma;
use crate::state::{BlochVector, CMatrix, DensityMatrix, PureState, C64};

/// A reproducible random stream: ChaCha8 keyed by `seed`, with `stream`
/// selecting one of 2^64 independent sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSpec {
    FubiniStudyPure { n: usize },
    Induced { n: usize, k: usize },
    HilbertSchmidt { n: usize },
    Bures { n: usize },
    RealInduced { n: usize, k: usize },
}

impl MeasureSpec {
    /// HS{N} → Induced{N,N}, FS{N} → Induced{N,1}.
    pub fn canonical(self) -> Self {
        match self {
            MeasureSpec::HilbertSchmidt { n } => MeasureSpec::Induced { n, k: n },
            MeasureSpec::FubiniStudyPure { n } => MeasureSpec::Induced { n, k: 1 },
            m => m,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            MeasureSpec::FubiniStudyPure { n }
            | MeasureSpec::Induced { n, .. }
            | MeasureSpec::HilbertSchmidt { n }
            | MeasureSpec::Bures { n }
            | MeasureSpec::RealInduced { n, .. } => n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        match *self {
            MeasureSpec::Induced { n, k } | MeasureSpec::RealInduced { n, k } => {
                if n == 0 || k == 0 {
                    return bad("N and K must be positive");
                }
            }
            MeasureSpec::Bures { n } => {
                if n < 2 {
                    return bad("Bures sampling needs N >= 2");
                }
            }
            MeasureSpec::FubiniStudyPure { n } | MeasureSpec::HilbertSchmidt { n } => {
                if n == 0 {
                    return bad("N must be positive");
                }
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match *self {
            MeasureSpec::FubiniStudyPure { n } => format!("fs(N={n})"),
            MeasureSpec::Induced { n, k } => format!("induced(N={n},K={k})"),
            MeasureSpec::HilbertSchmidt { n } => format!("hs(N={n})"),
            MeasureSpec::Bures { n } => format!("bures(N={n})"),
            MeasureSpec::RealInduced { n, k } => format!("real-induced(N={n},K={k})"),
        }
    }
}

/// i.i.d. standard complex Gaussians (real and imaginary variance 1/2).
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * s, im * s)
    })
}

/// Haar unitary from the QR decomposition of a Ginibre matrix, with the
/// phases of R's diagonal moved out of Q.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let z = ginibre(n, n, rng);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..n {
        let d = r[(c, c)];
        let nd = d.norm();
        let ph = if nd > 0.0 { d / nd } else { C64::new(1.0, 0.0) };
        for row in 0..n {
            q[(row, c)] *= ph;
        }
    }
    q
}

pub fn sample_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PureState {
    loop {
        let g = ginibre(n, 1, rng);
        let v = DVector::from_iterator(n, g.iter().copied());
        if let Ok(p) = PureState::normalized(v) {
            return p;
        }
    }
}

/// ρ = ΦΦ†/Tr ΦΦ† with Φ an N×K Ginibre matrix.
pub fn sample_induced<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<DensityMatrix> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidSpec("N and K must be positive".into()));
    }
    let phi = ginibre(n, k, rng);
    let w = &phi * phi.adjoint();
    let t = w.trace().re;
    DensityMatrix::new(w / C64::new(t, 0.0))
}

pub fn sample_hs<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DensityMatrix> {
    sample_induced(n, n, rng)
}

/// ρ = GGᵀ/Tr GGᵀ with G real Gaussian N×K.
pub fn sample_real_induced<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<DensityMatrix> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidSpec("N and K must be positive".into()));
    }
    let g = DMatrix::<f64>::from_fn(n, k, |_, _| StandardNormal.sample(rng));
    let w = &g * g.transpose();
    let t = w.trace();
    let m = CMatrix::from_fn(n, n, |i, j| C64::new(w[(i, j)] / t, 0.0));
    DensityMatrix::new(m)
}

/// Uniform random direction times a radius, mapped to a qubit state.
fn qubit_from_radius<R: Rng + ?Sized>(r: f64, rng: &mut R) -> Result<DensityMatrix> {
    let mut v = [0.0f64; 3];
    loop {
        for x in v.iter_mut() {
            *x = StandardNormal.sample(rng);
        }
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-300 {
            for x in v.iter_mut() {
                *x *= r / n;
            }
            break;
        }
    }
    BlochVector::new(v)?.to_state()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuresMcmcConfig {
    pub burn_in: usize,
    pub thinning: usize,
    pub proposal_concentration: f64,
}

impl Default for BuresMcmcConfig {
    fn default() -> Self {
        BuresMcmcConfig { burn_in: 10_000, thinning: 10, proposal_concentration: 50.0 }
    }
}

impl BuresMcmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thinning == 0 || !(self.proposal_concentration > 0.0) {
            return Err(Error::InvalidSpec("thinning >= 1 and positive concentration required".into()));
        }
        Ok(())
    }
}

/// Radial CDF of the qubit Bures measure in the angle r = (√2/2) sin θ.
fn bures_radial_cdf(theta: f64) -> f64 {
    (2.0 * theta - (2.0 * theta).sin()) / std::f64::consts::PI
}

struct RadialTable {
    cdf: Vec<f64>,
    theta: Vec<f64>,
    slope: Vec<f64>,
}

const TABLE_POINTS: usize = 4096;

fn radial_table() -> &'static RadialTable {
    static T: OnceLock<RadialTable> = OnceLock::new();
    T.get_or_init(|| {
        let h = std::f64::consts::FRAC_PI_2 / (TABLE_POINTS - 1) as f64;
        let theta: Vec<f64> = (0..TABLE_POINTS).map(|i| i as f64 * h).collect();
        let cdf: Vec<f64> = theta.iter().map(|&t| bures_radial_cdf(t)).collect();
        let slope = pchip_slopes(&cdf, &theta);
        RadialTable { cdf, theta, slope }
    })
}

/// Fritsch–Carlson slopes for a monotone cubic through (x, y).
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    let mut m = vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let w1 = 2.0 * h1 + h0;
            let w2 = h1 + 2.0 * h0;
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    m
}

/// θ with CDF(θ) = u: monotone cubic lookup, polished by Newton on the exact CDF.
fn bures_radial_inverse(u: f64) -> f64 {
    let t = radial_table();
    let u = u.clamp(0.0, 1.0);
    let i = match t.cdf.binary_search_by(|c| c.total_cmp(&u)) {
        Ok(i) => i.min(TABLE_POINTS - 2),
        Err(i) => i.saturating_sub(1).min(TABLE_POINTS - 2),
    };
    let (x0, x1) = (t.cdf[i], t.cdf[i + 1]);
    let h = x1 - x0;
    let mut th = if i == 0 {
        // CDF ≈ 4θ³/(3π) near the origin
        (0.75 * std::f64::consts::PI * u).cbrt()
    } else {
        let s = (u - x0) / h;
        let (h00, h10, h01, h11) =
            (2.0 * s.powi(3) - 3.0 * s * s + 1.0, s.powi(3) - 2.0 * s * s + s, -2.0 * s.powi(3) + 3.0 * s * s, s.powi(3) - s * s);
        h00 * t.theta[i] + h10 * h * t.slope[i] + h01 * t.theta[i + 1] + h11 * h * t.slope[i + 1]
    };
    for _ in 0..3 {
        let d = 4.0 / std::f64::consts::PI * th.sin().powi(2);
        if d <= 0.0 {
            break;
        }
        th = (th - (bures_radial_cdf(th) - u) / d).clamp(0.0, std::f64::consts::FRAC_PI_2);
    }
    th
}

/// Bloch radius drawn from P_B(r) = (8/π) r²/√(1/2 − r²).
pub fn sample_bures_radius<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    std::f64::consts::FRAC_1_SQRT_2 * bures_radial_inverse(u).sin()
}

/// Log of the unnormalized Bures eigenvalue density (flat simplex measure).
fn bures_log_target(l: &[f64]) -> f64 {
    let mut s = 0.0;
    for (i, &a) in l.iter().enumerate() {
        if !(a > 0.0) {
            return f64::NEG_INFINITY;
        }
        s -= 0.5 * a.ln();
        for &b in &l[i + 1..] {
            let d = (a - b).abs();
            if d == 0.0 {
                return f64::NEG_INFINITY;
            }
            s += 2.0 * d.ln() - (a + b).ln();
        }
    }
    s
}

const PROPOSAL_FLOOR: f64 = 0.5;

fn dirichlet_log_density(y: &[f64], alpha: &[f64]) -> f64 {
    let a0: f64 = alpha.iter().sum();
    let mut s = ln_gamma(a0);
    for (&yi, &ai) in y.iter().zip(alpha) {
        s += (ai - 1.0) * yi.ln() - ln_gamma(ai);
    }
    s
}

/// Metropolis–Hastings chain on the eigenvalue simplex targeting the Bures
/// density, with Dirichlet(c·λ + 1/2) proposals.
#[derive(Debug, Clone)]
pub struct BuresChain {
    n: usize,
    cfg: BuresMcmcConfig,
    lambda: Vec<f64>,
    log_p: f64,
    accepted: u64,
    proposed: u64,
}

impl BuresChain {
    pub fn new<R: Rng + ?Sized>(n: usize, cfg: BuresMcmcConfig, rng: &mut R) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSpec("Bures sampling needs N >= 2".into()));
        }
        cfg.validate()?;
        let tot = (n * (n + 1) / 2) as f64;
        let lambda: Vec<f64> = (1..=n).map(|i| i as f64 / tot).collect();
        let log_p = bures_log_target(&lambda);
        let mut ch = BuresChain { n, cfg, lambda, log_p, accepted: 0, proposed: 0 };
        for _ in 0..cfg.burn_in {
            ch.step(rng);
        }
        ch.accepted = 0;
        ch.proposed = 0;
        Ok(ch)
    }

    fn alpha(&self, l: &[f64]) -> Vec<f64> {
        l.iter().map(|&x| self.cfg.proposal_concentration * x + PROPOSAL_FLOOR).collect()
    }

    fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.proposed += 1;
        let a = self.alpha(&self.lambda);
        let mut y: Vec<f64> = a.iter().map(|&ai| Gamma::new(ai, 1.0).expect("positive shape").sample(rng)).collect();
        let s: f64 = y.iter().sum();
        if !(s > 0.0) || !s.is_finite() {
            return;
        }
        for v in y.iter_mut() {
            *v /= s;
        }
        if y.iter().any(|&v| !(v > 0.0)) {
            return;
        }
        let lp = bures_log_target(&y);
        if !lp.is_finite() {
            return;
        }
        let back = self.alpha(&y);
        let log_ratio = lp - self.log_p + dirichlet_log_density(&self.lambda, &back) - dirichlet_log_density(&y, &a);
        let u: f64 = rng.gen();
        if u.ln() < log_ratio {
            self.lambda = y;
            self.log_p = lp;
            self.accepted += 1;
        }
    }

    /// Advance `thinning` steps and return the current spectrum.
    pub fn next_spectrum<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<f64> {
        for _ in 0..self.cfg.thinning {
            self.step(rng);
        }
        self.lambda.clone()
    }

    /// Next state: spectrum from the chain, eigenbasis from an independent Haar unitary.
    pub fn next_state<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<DensityMatrix> {
        let l = self.next_spectrum(rng);
        let u = haar_unitary(self.n, rng);
        DensityMatrix::from_spectral(l, u)
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// One Bures-distributed state. Exact radial sampler for N=2, otherwise a
/// freshly burned-in MCMC chain (use [`sample_bures_many`] for bulk draws).
pub fn sample_bures<R: Rng + ?Sized>(n: usize, rng: &mut R, cfg: &BuresMcmcConfig) -> Result<DensityMatrix> {
    if n < 2 {
        return Err(Error::InvalidSpec("Bures sampling needs N >= 2".into()));
    }
    if n == 2 {
        let r = sample_bures_radius(rng);
        return qubit_from_radius(r, rng);
    }
    let mut ch = BuresChain::new(n, *cfg, rng)?;
    ch.next_state(rng)
}

/// `count` states from one chain, with an effective-sample-size check on Tr√ρ.
pub fn sample_bures_many<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R, cfg: &BuresMcmcConfig) -> Result<Vec<DensityMatrix>> {
    if n == 2 {
        return (0..count).map(|_| sample_bures(2, rng, cfg)).collect();
    }
    let mut ch = BuresChain::new(n, *cfg, rng)?;
    let mut out = Vec::with_capacity(count);
    let mut trace = Vec::with_capacity(count);
    for _ in 0..count {
        let s = ch.next_state(rng)?;
        trace.push(s.trace_sqrt());
        out.push(s);
    }
    if count >= 200 {
        let ess = effective_sample_size(&trace);
        let threshold = 0.05 * count as f64;
        if ess < threshold {
            return Err(Error::McmcNotConverged { ess, threshold });
        }
    }
    Ok(out)
}

/// ESS from the initial positive sequence of autocorrelations.
pub fn effective_sample_size(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 4 {
        return n as f64;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    if var == 0.0 {
        return n as f64;
    }
    let acf = |lag: usize| -> f64 { (0..n - lag).map(|i| (x[i] - mean) * (x[i + lag] - mean)).sum::<f64>() / (n as f64 * var) };
    let mut sum = 0.0;
    let mut lag = 1;
    while lag + 1 < n / 2 {
        let pair = acf(lag) + acf(lag + 1);
        if pair <= 0.0 {
            break;
        }
        sum += pair;
        lag += 2;
    }
    n as f64 / (1.0 + 2.0 * sum).max(1.0 / n as f64)
}

/// Draw one state from any measure (Bures N ≥ 3 via a fresh chain).
pub fn sample_measure<R: Rng + ?Sized>(m: &MeasureSpec, rng: &mut R, cfg: &BuresMcmcConfig) -> Result<DensityMatrix> {
    m.validate()?;
    match m.canonical() {
        MeasureSpec::Induced { n, k } => sample_induced(n, k, rng),
        MeasureSpec::Bures { n } => sample_bures(n, rng, cfg),
        MeasureSpec::RealInduced { n, k } => sample_real_induced(n, k, rng),
        _ => unreachable!("canonical form"),
    }
}

fn check_simplex(l: &[f64]) -> Result<()> {
    let s: f64 = l.iter().sum();
    if l.iter().any(|&x| x < -1e-12) || (s - 1.0).abs() > 1e-9 {
        return Err(Error::OffSimplex);
    }
    Ok(())
}

fn vandermonde_sq_ln(l: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..l.len() {
        for j in i + 1..l.len() {
            s += 2.0 * (l[i] - l[j]).abs().ln();
        }
    }
    s
}

/// Joint eigenvalue density of μ_{N,K} (K ≥ N) on the flat simplex.
pub fn pdf_induced_eigs(lams: &[f64], n: usize, k: f64) -> Result<f64> {
    check_simplex(lams)?;
    if lams.len() != n {
        return Err(Error::DimMismatch(lams.len(), n));
    }
    if k < n as f64 {
        return Err(Error::Domain(format!("K = {k} < N = {n}: the density is singular")));
    }
    let nf = n as f64;
    let mut ln_c = ln_gamma(k * nf);
    for j in 0..n {
        ln_c -= ln_gamma(k - j as f64) + ln_gamma(nf - j as f64 + 1.0);
    }
    let mut ln_p = ln_c + vandermonde_sq_ln(lams);
    let e = k - nf;
    if e != 0.0 {
        for &l in lams {
            ln_p += e * l.max(0.0).ln();
        }
    }
    Ok(if ln_p.is_nan() { 0.0 } else { ln_p.exp() })
}

/// Bures joint eigenvalue density on the flat simplex.
pub fn pdf_bures_eigs(lams: &[f64], n: usize) -> Result<f64> {
    check_simplex(lams)?;
    if lams.len() != n {
        return Err(Error::DimMismatch(lams.len(), n));
    }
    let nf = n as f64;
    let mut ln_c = (nf * nf - nf) * std::f64::consts::LN_2 + ln_gamma(nf * nf / 2.0) - 0.5 * nf * std::f64::consts::PI.ln();
    for j in 1..=n + 1 {
        ln_c -= ln_gamma(j as f64);
    }
    let t = bures_log_target(lams);
    if t == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    Ok((ln_c + t).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_is_unitary() {
        let mut rng = RngStream::new(1, 0).rng();
        let u = haar_unitary(5, &mut rng);
        let e = &u.adjoint() * &u - CMatrix::identity(5, 5);
        assert!(e.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn streams_are_deterministic() {
        let a = sample_hs(3, &mut RngStream::new(7, 3).rng()).unwrap();
        let b = sample_hs(3, &mut RngStream::new(7, 3).rng()).unwrap();
        let c = sample_hs(3, &mut RngStream::new(7, 4).rng()).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn induced_rank() {
        let mut rng = RngStream::new(2, 0).rng();
        for _ in 0..20 {
            let r = sample_induced(3, 2, &mut rng).unwrap();
            assert!(r.eigenvalues()[0] <= 1e-12);
            assert_eq!(r.rank(1e-9), 2);
        }
        let p = sample_induced(4, 1, &mut rng).unwrap();
        assert!((p.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn real_induced_is_symmetric() {
        let r = sample_real_induced(3, 2, &mut RngStream::new(3, 0).rng()).unwrap();
        let m = r.matrix();
        for i in 0..3 {
            for j in 0..3 {
                assert!((m[(i, j)] - m[(j, i)]).norm() < 1e-12);
                assert_eq!(m[(i, j)].im, 0.0);
            }
        }
        assert_eq!(r.rank(1e-9), 2);
    }

    #[test]
    fn radial_inverse_accuracy() {
        for i in 1..200 {
            let u = i as f64 / 200.0;
            let th = bures_radial_inverse(u);
            assert!((bures_radial_cdf(th) - u).abs() < 1e-12, "u = {u}");
        }
        assert!(bures_radial_inverse(1e-12) < 1e-3);
    }

    #[test]
    fn eigen_density_edge_cases() {
        assert_eq!(pdf_bures_eigs(&[0.5, 0.5], 2).unwrap(), 0.0);
        assert_eq!(pdf_induced_eigs(&[1.0 / 3.0; 3], 3, 3.0).unwrap(), 0.0);
        assert!(matches!(pdf_bures_eigs(&[0.7, 0.7], 2), Err(Error::OffSimplex)));
        let hs = pdf_induced_eigs(&[0.2, 0.8], 2, 2.0).unwrap();
        assert!((hs - 3.0 * 0.36).abs() < 1e-12);
    }
}
