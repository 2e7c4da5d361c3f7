//! Closed forms, gamma-ratio means and the X-matrix route for moments of the
//! root fidelity between random states.

pub mod series;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{gamma_ratio, gamma_ratio_sq, is_nonpositive_int, ln_beta, ln_gamma, rational_to_f64};

pub use series::{moment_root_fidelity_series, MomentTable, SeriesConfig};

/// Where a number came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    Series,
    SeriesZk,
    Quadrature,
    MonteCarlo,
    Continued,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed-form",
            Provenance::Series => "series",
            Provenance::SeriesZk => "series-zk",
            Provenance::Quadrature => "quadrature",
            Provenance::MonteCarlo => "monte-carlo",
            Provenance::Continued => "continued",
        }
    }
}

fn check_unit(f: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::Domain(format!("F = {f} outside [0, 1]")));
    }
    Ok(())
}

fn check_open_unit(f: f64) -> Result<()> {
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::Domain(format!("F = {f} outside (0, 1)")));
    }
    Ok(())
}

/// Mean fidelity between two Fubini–Study pure states: 1/N.
pub fn mean_fidelity_fs(n: usize) -> f64 {
    1.0 / n as f64
}

/// Pure–pure fidelity density (N−1)(1−F)^{N−2}.
pub fn pdf_pure_pure(n: usize, f: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain("N >= 2 required".into()));
    }
    check_unit(f)?;
    Ok((n - 1) as f64 * (1.0 - f).powi(n as i32 - 2))
}

fn beta_pdf(a: f64, b: f64, f: f64) -> f64 {
    ((a - 1.0) * f.ln() + (b - 1.0) * (1.0 - f).ln() - ln_beta(a, b)).exp()
}

/// Fidelity between a fixed pure state and an induced μ_{N,K} state:
/// Beta(K, K(N−1)).
pub fn pdf_pure_induced(n: usize, k: f64, f: f64) -> Result<f64> {
    if n < 2 || !(k > 0.0) {
        return Err(Error::Domain(format!("need N >= 2 and K > 0, got N = {n}, K = {k}")));
    }
    check_open_unit(f)?;
    Ok(beta_pdf(k, k * (n - 1) as f64, f))
}

pub fn pdf_pure_hs(n: usize, f: f64) -> Result<f64> {
    pdf_pure_induced(n, n as f64, f)
}

/// Real (rebit) analogue: Beta(K/2, K(N−1)/2).
pub fn pdf_pure_real_induced(n: usize, k: f64, f: f64) -> Result<f64> {
    if n < 2 || !(k > 0.0) {
        return Err(Error::Domain(format!("need N >= 2 and K > 0, got N = {n}, K = {k}")));
    }
    check_open_unit(f)?;
    Ok(beta_pdf(k / 2.0, k * (n - 1) as f64 / 2.0, f))
}

/// CDF of Beta(a, b), handy as a KS reference for the pure–induced laws.
pub fn beta_cdf(a: f64, b: f64, f: f64) -> f64 {
    crate::special::beta_inc(a, b, f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticMeasure {
    HilbertSchmidt,
    Bures,
}

/// Leading coefficient c_q in ⟨Tr ρ^q⟩ ≈ c_q N^{1−q}.
pub fn asymptotic_trace_moment(q: f64, m: AsymptoticMeasure) -> f64 {
    match m {
        AsymptoticMeasure::HilbertSchmidt => (ln_gamma(1.0 + 2.0 * q) - ln_gamma(1.0 + q) - ln_gamma(2.0 + q)).exp(),
        AsymptoticMeasure::Bures => {
            (q * std::f64::consts::LN_2 + ln_gamma((3.0 * q + 1.0) / 2.0) - ln_gamma((1.0 + q) / 2.0) - ln_gamma(2.0 + q)).exp()
        }
    }
}

/// Bloch-radius density of μ_{2,K}, continued to real K > 1.
pub fn radial_pdf_2k(r: f64, k: f64) -> Result<f64> {
    if !(k > 1.0) {
        return Err(Error::Domain(format!("K = {k} must exceed 1")));
    }
    let rmax = std::f64::consts::FRAC_1_SQRT_2;
    if !(0.0..=rmax).contains(&r) {
        return Err(Error::Domain(format!("r = {r} outside [0, 1/sqrt 2]")));
    }
    let ln_c = (k + 1.5) * std::f64::consts::LN_2 + ln_gamma(k - 0.5) - 0.5 * std::f64::consts::PI.ln() - ln_gamma(k - 1.0);
    let t = 0.5 - r * r;
    if t <= 0.0 {
        return Ok(if k > 2.0 { 0.0 } else if k == 2.0 { ln_c.exp() * r * r } else { f64::INFINITY });
    }
    Ok((ln_c + (k - 2.0) * t.ln()).exp() * r * r)
}

/// ⟨F⟩ for two independent μ_{2,K} qubits.
pub fn mean_fidelity_2k(k: f64) -> Result<f64> {
    if !(k >= 1.0) {
        return Err(Error::Domain(format!("K = {k} must be at least 1")));
    }
    let q = gamma_ratio(k + 0.5, k + 1.0) * gamma_ratio(k - 0.5, k - 1.0);
    Ok(0.5 + 0.5 * q * q)
}

/// Normalization C(K) = 2(K−1)(Γ(2K)/Γ(K)²)².
pub fn c_of_k(k: f64) -> f64 {
    2.0 * (k - 1.0) * (ln_gamma(2.0 * k) - 2.0 * ln_gamma(k)).exp().powi(2)
}

/// A term coef · A^e · F^{a/2} (1−F)^{b/2}, with A = arccos(1−2F).
type TermKey = (bool, i64, i64);

fn differentiate(terms: &BTreeMap<TermKey, BigRational>) -> BTreeMap<TermKey, BigRational> {
    let mut out: BTreeMap<TermKey, BigRational> = BTreeMap::new();
    let mut add = |k: TermKey, c: BigRational| {
        let e = out.entry(k).or_insert_with(BigRational::zero);
        *e += c;
    };
    let half = |x: i64| BigRational::new(BigInt::from(x), BigInt::from(2));
    for (&(acos, a2, b2), c) in terms {
        if c.is_zero() {
            continue;
        }
        // d/dF F^a (1−F)^b
        if a2 != 0 {
            add((acos, a2 - 2, b2), c * half(a2));
        }
        if b2 != 0 {
            add((acos, a2, b2 - 2), -(c * half(b2)));
        }
        // dA/dF = F^{−1/2}(1−F)^{−1/2}
        if acos {
            add((false, a2 - 1, b2 - 1), c.clone());
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Symbolic (d/dF)^order of arccos(1−2F)/√(F(1−F)).
fn arccos_kernel_derivative(order: usize) -> BTreeMap<TermKey, BigRational> {
    let mut t = BTreeMap::new();
    t.insert((true, -1, -1), BigRational::one());
    for _ in 0..order {
        t = differentiate(&t);
    }
    t
}

/// Closed-form symmetric qubit density P_{2,K}(F) for half-integer or integer K ≥ 3/2.
pub fn pdf_fidelity_2k_closed(f: f64, k: f64) -> Result<f64> {
    let twice = 2.0 * (k - 1.0);
    if twice != twice.round() || twice < 1.0 {
        return Err(Error::UnsupportedK(k, "needs 2(K-1) a positive integer; use the integral form".into()));
    }
    check_open_unit(f)?;
    let order = (2.0 * k - 3.0).round() as usize;
    let terms = arccos_kernel_derivative(order);
    let acos = (1.0 - 2.0 * f).acos();
    let (lf, lg) = (f.ln(), (1.0 - f).ln());
    let p = twice;
    // fold the prefactor (F(1−F))^{2(K−1)} into each term's powers
    let mut sum = 0.0;
    for (&(has_a, a2, b2), c) in &terms {
        let ea = a2 as f64 / 2.0 + p;
        let eb = b2 as f64 / 2.0 + p;
        let mut v = rational_to_f64(c) * (ea * lf + eb * lg).exp();
        if has_a {
            v *= acos;
        }
        sum += v;
    }
    let ln_pref = c_of_k(k).ln() - p * 4f64.ln() - ln_gamma(order as f64 + 1.0);
    Ok((ln_pref.exp() * sum).max(0.0))
}

/// Large-K form Γ(2K+1/2)/(Γ(3/2)Γ(2K−1)) F^{2(K−1)} √(1−F).
pub fn pdf_fidelity_2k_asymptotic(f: f64, k: f64) -> Result<f64> {
    if !(k > 1.0) {
        return Err(Error::Domain(format!("K = {k} must exceed 1")));
    }
    check_unit(f)?;
    let ln_c = ln_gamma(2.0 * k + 0.5) - ln_gamma(1.5) - ln_gamma(2.0 * k - 1.0);
    if f == 0.0 {
        return Ok(0.0);
    }
    Ok((ln_c + 2.0 * (k - 1.0) * f.ln()).exp() * (1.0 - f).sqrt())
}

/// G(m) = (Γ(KN)/Γ(KN + m/2))².
pub fn g_const(n: usize, k: f64, m: u32) -> f64 {
    let kn = k * n as f64;
    gamma_ratio_sq(kn, kn + m as f64 / 2.0)
}

/// The matrix (X_n)_{kl} = Γ(n+k+l−1) Γ(n+l), stored as log-magnitude and sign.
#[derive(Debug, Clone, PartialEq)]
pub struct XMatrix {
    pub dim: usize,
    pub offset: f64,
    pub ln_abs: Vec<Vec<f64>>,
    pub sign: Vec<Vec<f64>>,
}

pub fn x_matrix(dim: usize, offset: f64) -> Result<XMatrix> {
    let mut ln_abs = vec![vec![0.0; dim]; dim];
    let mut sign = vec![vec![0.0; dim]; dim];
    for k in 1..=dim {
        for l in 1..=dim {
            let (a, b) = (offset + (k + l) as f64 - 1.0, offset + l as f64);
            if is_nonpositive_int(a) || is_nonpositive_int(b) {
                return Err(Error::Domain(format!("X_{offset} has a gamma pole at ({k},{l})")));
            }
            let (la, sa) = crate::special::lgamma_signed(a);
            let (lb, sb) = crate::special::lgamma_signed(b);
            ln_abs[k - 1][l - 1] = la + lb;
            sign[k - 1][l - 1] = sa * sb;
        }
    }
    Ok(XMatrix { dim, offset, ln_abs, sign })
}

impl XMatrix {
    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.dim, self.dim, |i, j| self.sign[i][j] * self.ln_abs[i][j].exp())
    }
}

/// Lagrange matrix M_{jl} = ℓ_j(t_l + shift) on the centered nodes t_j = j − (N+1)/2.
fn lagrange_matrix(dim: usize, shift: f64) -> Vec<Vec<f64>> {
    let c = (dim as f64 + 1.0) / 2.0;
    let t: Vec<f64> = (1..=dim).map(|j| j as f64 - c).collect();
    let mut m = vec![vec![0.0; dim]; dim];
    for j in 0..dim {
        for l in 0..dim {
            let y = t[l] + shift;
            let mut v = 1.0;
            for i in 0..dim {
                if i != j {
                    v *= (y - t[i]) / (t[j] - t[i]);
                }
            }
            m[j][l] = v;
        }
    }
    m
}

struct XTraces {
    half: f64,
    half_sq: f64,
    one: f64,
}

/// Traces of X_n⁻¹X_{n+1/2}, (X_n⁻¹X_{n+1/2})² and X_n⁻¹X_{n+1}.
///
/// With X_n = P_n D_n², P polynomial in n+l and D_n = diag Γ(n+l), the
/// products reduce to r_l M with r_l = (Γ(n+l+1/2)/Γ(n+l))² and M a fixed
/// Lagrange matrix; the n-dependence is only in r_l, which continues to
/// real K away from the poles of Γ(n+l+1/2).
fn x_traces(dim: usize, k: f64) -> Result<XTraces> {
    let n = k - dim as f64;
    let mut r = Vec::with_capacity(dim);
    for l in 1..=dim {
        let a = n + l as f64 + 0.5;
        if is_nonpositive_int(a) {
            return Err(Error::Domain(format!("Gamma({a}) pole: K = {k} is not reachable at N = {dim}")));
        }
        r.push(gamma_ratio_sq(a, n + l as f64));
    }
    let m = lagrange_matrix(dim, 0.5);
    let half: f64 = (0..dim).map(|l| r[l] * m[l][l]).sum();
    let mut half_sq = 0.0;
    for l in 0..dim {
        for j in 0..dim {
            half_sq += r[l] * r[j] * m[l][j] * m[j][l];
        }
    }
    // ℓ_N(t_N + 1) = N, all other diagonal entries vanish
    let one = dim as f64 * k * k;
    Ok(XTraces { half, half_sq, one })
}

fn check_nk(dim: usize, k: f64) -> Result<()> {
    if dim == 0 || !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!("need N >= 1 and K > 0, got N = {dim}, K = {k}")));
    }
    Ok(())
}

/// Tag for X-route results: K below N is an analytic continuation.
pub fn x_route_provenance(dim: usize, k: f64) -> Provenance {
    if k < dim as f64 {
        Provenance::Continued
    } else {
        Provenance::ClosedForm
    }
}

/// ⟨√F⟩_{N,K} = G(1) Tr[X_n⁻¹ X_{n+1/2}].
pub fn mean_root_fidelity_nk(dim: usize, k: f64) -> Result<f64> {
    check_nk(dim, k)?;
    let t = x_traces(dim, k)?;
    Ok(g_const(dim, k, 1) * t.half)
}

/// ⟨F⟩_{N,K} = G(2)[Tr X_n⁻¹X_{n+1} + (Tr X_n⁻¹X_{n+1/2})² − Tr (X_n⁻¹X_{n+1/2})²].
pub fn mean_fidelity_nk(dim: usize, k: f64) -> Result<f64> {
    check_nk(dim, k)?;
    let t = x_traces(dim, k)?;
    Ok(g_const(dim, k, 2) * (t.one + t.half * t.half - t.half_sq))
}

fn rsq(a: f64, b: f64) -> f64 {
    gamma_ratio_sq(a, b)
}

/// Explicit ⟨√F⟩_{2,K}.
pub fn mean_root_fidelity_2k_explicit(k: f64) -> f64 {
    rsq(2.0 * k, 2.0 * k + 0.5) * (1.5 * rsq(k + 0.5, k) + 0.5 * rsq(k - 0.5, k - 1.0))
}

/// Explicit ⟨√F⟩_{3,K}.
pub fn mean_root_fidelity_3k_explicit(k: f64) -> f64 {
    rsq(3.0 * k, 3.0 * k + 0.5) * (0.375 * rsq(k - 1.5, k - 2.0) + 0.75 * rsq(k - 0.5, k - 1.0) + 1.875 * rsq(k + 0.5, k))
}

/// Explicit ⟨F⟩_{3,K}.
pub fn mean_fidelity_3k_explicit(k: f64) -> f64 {
    let a = rsq(k + 0.5, k);
    let b = rsq(k - 0.5, k - 1.0);
    let c = rsq(k - 1.5, k - 2.0);
    1.0 / 3.0 + (b * (5.0 / 12.0 * a + c / 12.0) + a * c / 6.0) / (k * k)
}

/// ⟨√F⟩_{N,2} for any N.
pub fn mean_root_fidelity_n2_explicit(n: f64) -> f64 {
    std::f64::consts::PI.sqrt() / 16.0 * (22.0 * n - 13.0) * rsq(2.0 * n, 2.0 * n + 0.5) * gamma_ratio(n - 0.5, n)
}

/// ⟨F⟩_{N,2} for any N.
pub fn mean_fidelity_n2_explicit(n: f64) -> f64 {
    let r = gamma_ratio(n - 0.5, n - 1.0) * gamma_ratio(n + 0.5, n + 1.0);
    (1.0 + 3.0 * std::f64::consts::PI / 16.0 * r) / n
}

/// Mean purity (N+K)/(NK+1) of μ_{N,K}.
pub fn mean_purity(n: usize, k: f64) -> f64 {
    let n = n as f64;
    (n + k) / (n * k + 1.0)
}

/// Universal cloning fidelity (N+3)/(2N+2).
pub fn cloning_fidelity(n: usize) -> f64 {
    (n as f64 + 3.0) / (2.0 * n as f64 + 2.0)
}

/// Probability that two random pure states beat the cloning fidelity:
/// 2^{1−N}((N−1)/(N+1))^{N−1}.
pub fn cloning_exceed_prob(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain("N >= 2 required".into()));
    }
    let nf = n as f64;
    Ok(2f64.powf(1.0 - nf) * ((nf - 1.0) / (nf + 1.0)).powf(nf - 1.0))
}

/// α = (F̃ − ⟨F⟩)/√(⟨F²⟩ − ⟨F⟩²).
pub fn gauge_alpha(f_tilde: f64, mean_f: f64, mean_f2: f64) -> Result<f64> {
    let var = mean_f2 - mean_f * mean_f;
    if !(var > 1e-15) {
        return Err(Error::DegenerateVariance);
    }
    Ok((f_tilde - mean_f) / var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn symbolic_derivative_first_order() {
        // d/dF [A/√(F(1−F))] = 1/(F(1−F)) + A[−½F^{−3/2}(1−F)^{−1/2} + ½F^{−1/2}(1−F)^{−3/2}]
        let t = arccos_kernel_derivative(1);
        assert_eq!(t.len(), 3);
        let f = 0.3f64;
        let a = (1.0 - 2.0 * f).acos();
        let mut v = 0.0;
        for (&(h, a2, b2), c) in &t {
            v += rational_to_f64(c) * f.powf(a2 as f64 / 2.0) * (1.0 - f).powf(b2 as f64 / 2.0) * if h { a } else { 1.0 };
        }
        let g = |x: f64| (1.0 - 2.0 * x).acos() / (x * (1.0 - x)).sqrt();
        let fd = (g(f + 1e-6) - g(f - 1e-6)) / 2e-6;
        assert!((v - fd).abs() < 1e-6);
    }

    #[test]
    fn x_route_matches_direct_solve() {
        use nalgebra::DMatrix;
        for (dim, k) in [(2usize, 2.0), (3, 3.0), (3, 4.5), (4, 4.0)] {
            let n = k - dim as f64;
            let x0 = x_matrix(dim, n).unwrap().to_f64();
            let xh = x_matrix(dim, n + 0.5).unwrap().to_f64();
            let x1 = x_matrix(dim, n + 1.0).unwrap().to_f64();
            let lu = x0.clone().lu();
            let a: DMatrix<f64> = lu.solve(&xh).unwrap();
            let b: DMatrix<f64> = lu.solve(&x1).unwrap();
            let direct = g_const(dim, k, 2) * (b.trace() + a.trace().powi(2) - (&a * &a).trace());
            assert!((direct - mean_fidelity_nk(dim, k).unwrap()).abs() < 1e-8, "({dim},{k})");
        }
    }

    #[test]
    fn printed_constants() {
        assert!((mean_root_fidelity_nk(2, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((mean_root_fidelity_nk(3, 1.0).unwrap() - 8.0 / 15.0).abs() < 1e-12);
        assert!((mean_fidelity_nk(3, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((mean_fidelity_nk(3, 2.0).unwrap() - (1.0 / 3.0 + 15.0 * (PI / 32.0).powi(2))).abs() < 1e-12);
        assert!((mean_root_fidelity_nk(2, 1.5).unwrap() - 128.0 * 13.0 / (225.0 * PI * PI)).abs() < 1e-12);
        assert!((mean_root_fidelity_nk(2, 2.0).unwrap() - 32.0 * 31.0 / (25.0 * 49.0)).abs() < 1e-12);
        assert_eq!(x_route_provenance(3, 2.0), Provenance::Continued);
    }

    #[test]
    fn qubit_closed_forms() {
        for &f in &[0.05f64, 0.3, 0.5, 0.77, 0.99] {
            let s = (f * (1.0 - f)).sqrt();
            let a = (1.0 - 2.0 * f).acos();
            let b = pdf_fidelity_2k_closed(f, 1.5).unwrap();
            assert!((b - 16.0 / (PI * PI) * s * a).abs() < 1e-12);
            let hs = pdf_fidelity_2k_closed(f, 2.0).unwrap();
            assert!((hs - (4.5 * f * (1.0 - f) - 2.25 * s * (1.0 - 2.0 * f) * a)).abs() < 1e-12);
        }
        assert!(matches!(pdf_fidelity_2k_closed(0.5, 1.7), Err(Error::UnsupportedK(..))));
    }

    #[test]
    fn misc_constants() {
        assert!((cloning_exceed_prob(2).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((asymptotic_trace_moment(0.5, AsymptoticMeasure::HilbertSchmidt) - 8.0 / (3.0 * PI)).abs() < 1e-14);
        assert!((asymptotic_trace_moment(1.0, AsymptoticMeasure::Bures) - 1.0).abs() < 1e-14);
        assert!((mean_fidelity_2k(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(gauge_alpha(0.5, 0.5, 0.25), Err(Error::DegenerateVariance)));
    }
}
