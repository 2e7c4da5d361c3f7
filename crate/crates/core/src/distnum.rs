//! Fidelity densities that only exist as integrals: the pure–Bures law, the
//! real-K qubit law and the general symmetric P_{N,K}(F).

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::analytic::{c_of_k, Provenance};
use crate::curve::DistributionCurve;
use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, integrate, integrate_generic, integrate_to_infinity, EndpointSubstitution, QuadConfig};
use crate::special::{gamma, ln_gamma};
use crate::state::C64;

fn check_open_unit(f: f64) -> Result<()> {
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::Domain(format!("F = {f} outside (0, 1)")));
    }
    Ok(())
}

/// Fidelity between a fixed pure state and a Bures-distributed mixed state.
pub fn pdf_pure_bures(n: usize, f: f64, cfg: &QuadConfig) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain("N >= 2 required".into()));
    }
    check_open_unit(f)?;
    if n == 2 {
        return Ok(8.0 / std::f64::consts::PI * (f * (1.0 - f)).sqrt());
    }
    let nf = n as f64;
    let h = nf * nf / 2.0;
    let a = h - nf - 1.0;
    let c = nf - 1.5;
    let b = h - nf + 0.5;
    let ln_pref = ln_gamma(h) + ln_gamma(2.0 * nf - 1.0) - ln_gamma(nf) - 2.0 * ln_gamma(nf - 0.5) - ln_gamma(h - nf);
    // x = F + (1−F)t
    let w = 1.0 - f;
    let qcfg = cfg.with_substitution(EndpointSubstitution::SqrtSingularity);
    let r = integrate(
        |t| {
            if t <= 0.0 || t >= 1.0 {
                return 0.0;
            }
            (a * t.ln() + c * (1.0 - t).ln() - b * (f + w * t).ln()).exp()
        },
        0.0,
        1.0,
        &qcfg,
    )?;
    Ok((ln_pref + (nf - 1.0) * f.ln() + (a + 1.0 + c) * w.ln()).exp() * r.value)
}

/// P_{2,K}(F) for real K ≥ 1 from the one-dimensional integral form.
pub fn pdf_fidelity_2k_integral(f: f64, k: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(k >= 1.0) {
        return Err(Error::Domain(format!("K = {k} must be at least 1")));
    }
    check_open_unit(f)?;
    if k == 1.0 {
        return Ok(1.0);
    }
    // x = e^{−u}: ∫₀¹ dx/x (x + 1/x + 2(1−2F))^{2(1−K)} = ∫₀^∞ (2cosh u + 2(1−2F))^{2(1−K)} du
    let e = 2.0 * (1.0 - k);
    let shift = 2.0 * (1.0 - 2.0 * f);
    let r = integrate_to_infinity(
        |u: f64| {
            if u > 700.0 {
                return 0.0;
            }
            (2.0 * u.cosh() + shift).powf(e)
        },
        0.0,
        cfg,
    )?;
    Ok(c_of_k(k) * (f * (1.0 - f)).powf(2.0 * (k - 1.0)) * r.value)
}

/// H_k(x) for x > 2.
pub fn h_k(x: f64, k: usize) -> Result<f64> {
    if !(x > 2.0) {
        return Err(Error::Domain(format!("x = {x} must exceed 2")));
    }
    let r = (x * x / 4.0 - 1.0).sqrt();
    let e = k as f64 - 1.0;
    Ok(-((x / 2.0 + r).powf(e) + (x / 2.0 - r).powf(e)) / r)
}

/// Exponent p_{kl} = k − 1 + 2(K − N + l) of the (k, l) entry.
fn exponent(k: usize, l: usize, n: usize, kk: usize) -> i32 {
    (k as i32 - 1) + 2 * (kk as i32 - n as i32 + l as i32)
}

const MAX_DIM: usize = 4;
const MAX_ENTRIES: usize = MAX_DIM * MAX_DIM;

/// Entries of the generating matrix at complex μ, from the u-integral along
/// u = v + iσc·tanh v (σ picks the side of the cut μ ≤ −2).
fn entries_complex(mu: C64, sigma: f64, n: usize, kk: usize, cfg: &QuadConfig) -> Result<[C64; MAX_ENTRIES]> {
    let c = 0.5;
    let min_rate = 2.0 * (kk as f64 - n as f64 + 1.0);
    let vmax = 40.0 / min_rate + 5.0;
    let mut gam = [0.0; MAX_ENTRIES];
    for k in 1..=n {
        for l in 1..=n {
            gam[(k - 1) * n + l - 1] = gamma(exponent(k, l, n, kk) as f64);
        }
    }
    let r = integrate_generic(
        |v: f64| {
            let th = (v).tanh();
            let u = C64::new(v, sigma * c * th);
            let du = C64::new(1.0, sigma * c * (1.0 - th * th));
            let w = u.cosh() * 2.0 + mu;
            let winv = w.inv();
            let mut out = [C64::new(0.0, 0.0); MAX_ENTRIES];
            for k in 1..=n {
                let ch = (u * (k as f64 - 1.0)).cosh() * du;
                for l in 1..=n {
                    let p = exponent(k, l, n, kk);
                    out[(k - 1) * n + l - 1] = ch * winv.powi(p);
                }
            }
            out
        },
        0.0,
        vmax,
        cfg,
    )?;
    let mut e = r.value;
    for (x, g) in e.iter_mut().zip(gam) {
        *x *= 4.0 * g;
    }
    Ok(e)
}

/// g(y) = arccosh(y)/√(y²−1) and its first `order` derivatives, from
/// (y²−1) g' + y g = 1. The square roots are taken as √(y−1)√(y+1), which
/// keeps g analytic off (−∞, −1].
fn arccosh_kernel_derivatives(y: C64, order: usize) -> Vec<C64> {
    let r = (y - 1.0).sqrt() * (y + 1.0).sqrt();
    let g = (y + r).ln() / r;
    let d = y * y - 1.0;
    let mut out = Vec::with_capacity(order + 1);
    out.push(g);
    if order >= 1 {
        out.push((C64::new(1.0, 0.0) - y * g) / d);
    }
    for n in 1..order {
        let nf = n as f64;
        let next = (-(y * out[n]) * (2.0 * nf + 1.0) - out[n - 1] * (nf * nf)) / d;
        out.push(next);
    }
    out
}

/// Coefficients of the Chebyshev polynomial T_m (index = power).
fn chebyshev(m: usize) -> Vec<f64> {
    let mut t0 = vec![1.0];
    if m == 0 {
        return t0;
    }
    let mut t1 = vec![0.0, 1.0];
    for _ in 1..m {
        let mut t2 = vec![0.0; t1.len() + 1];
        for (i, c) in t1.iter().enumerate() {
            t2[i + 1] += 2.0 * c;
        }
        for (i, c) in t0.iter().enumerate() {
            t2[i] -= c;
        }
        t0 = t1;
        t1 = t2;
    }
    t1
}

/// Entries from the elementary form E_kl = −2^{1−q} (d/dy)^q [T_{k−1}(y) g(y)],
/// y = μ/2, q = p_kl − 1. Accurate near the branch point μ = −2; loses
/// digits near μ = +2, where the integral form is used instead.
fn entries_closed(mu: C64, n: usize, kk: usize) -> [C64; MAX_ENTRIES] {
    let y = mu * 0.5;
    let qmax = (1..=n).flat_map(|k| (1..=n).map(move |l| exponent(k, l, n, kk) - 1)).max().unwrap_or(0) as usize;
    let g = arccosh_kernel_derivatives(y, qmax);
    let mut out = [C64::new(0.0, 0.0); MAX_ENTRIES];
    for k in 1..=n {
        let t = chebyshev(k - 1);
        // derivatives of T_{k−1} at y
        let mut tder = Vec::with_capacity(t.len());
        let mut poly = t.clone();
        for _ in 0..t.len() {
            let v = poly.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * y + *c);
            tder.push(v);
            poly = poly.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect();
        }
        for l in 1..=n {
            let q = (exponent(k, l, n, kk) - 1) as usize;
            let mut acc = C64::new(0.0, 0.0);
            let mut binom = 1.0;
            for (j, tj) in tder.iter().enumerate().take(q + 1) {
                if j > 0 {
                    binom *= (q + 1 - j) as f64 / j as f64;
                }
                acc += tj * g[q - j] * binom;
            }
            out[(k - 1) * n + l - 1] = -acc * 2f64.powi(1 - q as i32);
        }
    }
    out
}

/// Z on either side of the cut, Z(−x ∓ i0) for x > 2.
fn z_on_cut(x: f64, below: bool, n: usize, kk: usize) -> C64 {
    let im = if below { -0.0 } else { 0.0 };
    det_of(&entries_closed(C64::new(-x, im), n, kk), n)
}

fn det_of(e: &[C64; MAX_ENTRIES], n: usize) -> C64 {
    DMatrix::from_fn(n, n, |i, j| e[i * n + j]).determinant()
}

/// Z(μ) at complex μ off the cut (−∞, −2].
pub fn z_complex(mu: C64, n: usize, kk: usize, cfg: &QuadConfig) -> Result<C64> {
    check_wishart(n, kk)?;
    if mu.re < 0.0 {
        return Ok(det_of(&entries_closed(mu, n, kk), n));
    }
    let sigma = if mu.im < 0.0 { -1.0 } else { 1.0 };
    Ok(det_of(&entries_complex(mu, sigma, n, kk, cfg)?, n))
}

/// The real matrices A₁(x) and A₂(x).
fn a_matrices(x: f64, n: usize, kk: usize, cfg: &QuadConfig) -> Result<([f64; MAX_ENTRIES], [f64; MAX_ENTRIES])> {
    let min_rate = 2.0 * (kk as f64 - n as f64 + 1.0);
    let umax = 40.0 / min_rate + 5.0;
    let fill = |u: f64, trig: bool| {
        let base = if trig { 2.0 * u.cos() + x } else { 2.0 * u.cosh() + x };
        let inv = 1.0 / base;
        let mut out = [0.0; MAX_ENTRIES];
        for k in 1..=n {
            let ch = if trig { (u * (k as f64 - 1.0)).cos() } else { (u * (k as f64 - 1.0)).cosh() };
            for l in 1..=n {
                out[(k - 1) * n + l - 1] = ch * inv.powi(exponent(k, l, n, kk));
            }
        }
        out
    };
    let a1 = integrate_generic(|u| fill(u, false), 0.0, umax, cfg)?.value;
    let a2 = integrate_generic(|u| fill(u, true), 0.0, std::f64::consts::PI, cfg)?.value;
    let mut r1 = [0.0; MAX_ENTRIES];
    let mut r2 = [0.0; MAX_ENTRIES];
    for k in 1..=n {
        for l in 1..=n {
            let i = (k - 1) * n + l - 1;
            let g = 4.0 * gamma(exponent(k, l, n, kk) as f64);
            r1[i] = g * a1[i];
            r2[i] = g * a2[i];
        }
    }
    Ok((r1, r2))
}

fn check_wishart(n: usize, kk: usize) -> Result<()> {
    if n < 1 || n > MAX_DIM || kk < n {
        return Err(Error::Domain(format!("need 1 <= N <= {MAX_DIM} and K >= N, got N = {n}, K = {kk}")));
    }
    Ok(())
}

fn check_x(x: f64) -> Result<()> {
    if !(x >= 2.0 + 1e-6) {
        return Err(Error::Domain(format!("x = {x} must be at least 2 + 1e-6")));
    }
    Ok(())
}

/// Z(x) = det A₁ for x > 2.
pub fn z_of_x(x: f64, n: usize, kk: usize, cfg: &QuadConfig) -> Result<f64> {
    check_wishart(n, kk)?;
    check_x(x)?;
    let (a1, _) = a_matrices(x, n, kk, cfg)?;
    Ok(DMatrix::from_fn(n, n, |i, j| a1[i * n + j]).determinant())
}

/// Im Z(−x − i0) = Im det(A₁ − iA₂) for x > 2.
pub fn im_z_minus(x: f64, n: usize, kk: usize, cfg: &QuadConfig) -> Result<f64> {
    check_wishart(n, kk)?;
    check_x(x)?;
    let (a1, a2) = a_matrices(x, n, kk, cfg)?;
    let m = DMatrix::from_fn(n, n, |i, j| C64::new(a1[i * n + j], -a2[i * n + j]));
    Ok(m.determinant().im)
}

/// The kernel B(x) in its printed form.
pub fn b_kernel(x: f64, f: f64, n: usize, kk: usize, cfg: &QuadConfig) -> Result<f64> {
    check_open_unit(f)?;
    if x <= 2.0 {
        return Ok(0.0);
    }
    let kn = (kk * n) as f64;
    let pw = 2.0 * kn - 3.0;
    let sf = f.sqrt();
    let lo = sf.asin();
    let hi = (x * sf / 2.0).min(1.0).asin();
    if hi <= lo {
        return Ok(0.0);
    }
    // y = (2/√F) sin φ
    let ln_fact = ln_gamma(pw + 1.0);
    let r = integrate(
        |phi: f64| {
            let y = 2.0 / sf * phi.sin();
            let d = x - y;
            if d <= 0.0 {
                0.0
            } else {
                (pw * d.ln() - ln_fact).exp() * 2.0 / sf
            }
        },
        lo,
        hi,
        cfg,
    )?;
    Ok(f.powf(kn - 1.0) * r.value)
}

/// Configuration of the W pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WConfig {
    /// Tolerances of the outer (x and angle) integrals.
    pub outer: QuadConfig,
    /// Tolerances of the entry integrals.
    pub inner: QuadConfig,
    /// Allowed deviation of the normalization factor from 1.
    pub max_drift: f64,
}

impl Default for WConfig {
    fn default() -> Self {
        WConfig {
            outer: QuadConfig::default().with_tol(1e-10, 1e-8),
            inner: QuadConfig::default().with_tol(1e-14, 1e-11),
            max_drift: 0.01,
        }
    }
}

const LEGENDRE_POINTS: usize = 48;

fn legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(LEGENDRE_POINTS))
}

/// Density W of the root fidelity √F for two independent μ_{N,K} states (K ≥ N).
///
/// W(s) = κ [ (1/π) ∫_ρ^{2/s} Im Z(−x−i0) I(sx) dx + (1/2πi) ∮_{|μ|=ρ} I(−sμ) Z(μ) dμ ]
/// with κ = Γ(KN)²/Z(0), any 2 < ρ < 2/s, and
/// I(z) = Σ_j (−z)^j / (j! Γ(KN − (j+1)/2)²), which vanishes for z ≥ 2.
#[derive(Debug)]
pub struct WPipelineState {
    pub n: usize,
    pub k: usize,
    pub z0: f64,
    pub kappa: f64,
    cfg: WConfig,
    order: usize,
    inv_fact: f64,
    norm: OnceLock<std::result::Result<f64, String>>,
}

impl WPipelineState {
    pub fn new(n: usize, k: usize, cfg: WConfig) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain("N >= 2 required".into()));
        }
        check_wishart(n, k)?;
        let offset = k as f64 - n as f64;
        let x = crate::analytic::x_matrix(n, offset)?.to_f64();
        let z0 = x.determinant();
        let kn = (k * n) as f64;
        let kappa = (2.0 * ln_gamma(kn)).exp() / z0;
        let d = 2 * k * n - 2;
        let order = d - 2;
        let inv_fact = (-ln_gamma(order as f64 + 1.0)).exp();
        Ok(WPipelineState { n, k, z0, kappa, cfg, order, inv_fact, norm: OnceLock::new() })
    }

    /// I(z) from its expansion at z = 2, where I and its first D−2
    /// derivatives vanish: I(z) = ∫_2^z (z−t)^{D−2}/(D−2)! h(t) dt with
    /// h = I^{(D−1)} = −1 + (2/π) arcsin(t/2). The map t = 2 + v²(z−2)
    /// removes the square-root branch point, and the explicit (z−2)^{D−1}
    /// keeps full relative accuracy near z = 2.
    pub fn kernel_i(&self, z: C64) -> C64 {
        let (xs, ws) = legendre();
        let m = self.order as i32;
        let dz = z - 2.0;
        let mut acc = C64::new(0.0, 0.0);
        for (&v, &w) in xs.iter().zip(ws) {
            let t = dz * (v * v) + 2.0;
            let h = (t * 0.5).asin() * (2.0 / std::f64::consts::PI) - 1.0;
            acc += h * (w * 2.0 * v * (1.0 - v * v).powi(m));
        }
        acc * dz.powi(m + 1) * self.inv_fact
    }

    /// W(s) before normalization.
    pub fn w_raw(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain(format!("root fidelity {s} outside (0, 1)")));
        }
        self.w_parts(s, 1.0 + 1.0 / s).map(|(c, r)| c + r)
    }

    /// Cut and circle parts of W(s) for contour radius ρ.
    fn w_parts(&self, s: f64, rho: f64) -> Result<(f64, f64)> {
        let (n, k) = (self.n, self.k);
        let inner = self.cfg.inner;
        // tolerances refer to W itself, not to the unscaled integrals
        let outer = self.cfg.outer.with_tol(self.cfg.outer.abs_tol / self.kappa, self.cfg.outer.rel_tol);
        let cut = integrate(
            |x| {
                let phi = z_on_cut(x, true, n, k).im;
                phi * self.kernel_i(C64::new(s * x, 0.0)).re
            },
            rho,
            2.0 / s,
            &outer,
        )?
        .value
            / std::f64::consts::PI;
        // conjugate symmetry folds the circle onto the upper half
        let circle = integrate(
            |th: f64| {
                let mu = C64::from_polar(rho, th);
                let z = z_complex(mu, n, k, &inner).unwrap_or(C64::new(f64::NAN, 0.0));
                (self.kernel_i(-mu * s) * z * mu).re
            },
            0.0,
            std::f64::consts::PI,
            &outer,
        )?
        .value
            / std::f64::consts::PI;
        let w = self.kappa * (cut + circle);
        if !w.is_finite() {
            return Err(Error::QuadratureFailure(format!("W({s}) is not finite")));
        }
        Ok((self.kappa * cut, self.kappa * circle))
    }

    /// ∫₀¹ s^m W(s) ds before normalization.
    pub fn raw_moment(&self, m: u32) -> Result<f64> {
        let r = integrate(
            |s| {
                if s <= 0.0 || s >= 1.0 {
                    return 0.0;
                }
                s.powi(m as i32) * self.w_raw(s).unwrap_or(f64::NAN)
            },
            0.0,
            1.0,
            &self.cfg.outer.with_tol(1e-9, 1e-7).with_substitution(EndpointSubstitution::SqrtSingularity),
        )?;
        if !r.value.is_finite() {
            return Err(Error::QuadratureFailure("moment integral is not finite".into()));
        }
        Ok(r.value)
    }

    /// ∫₀¹ P(F) dF of the raw curve; a NormalizationDrift error if it is
    /// further than the configured drift from 1.
    pub fn normalization(&self) -> Result<f64> {
        let v = self.norm.get_or_init(|| self.raw_moment(0).map_err(|e| e.to_string()));
        let v = v.clone().map_err(Error::QuadratureFailure)?;
        if (v - 1.0).abs() > self.cfg.max_drift {
            return Err(Error::NormalizationDrift(v));
        }
        Ok(v)
    }

    /// Normalized P_{N,K}(F) = W(√F)/(2√F) / normalization.
    pub fn pdf(&self, f: f64) -> Result<f64> {
        check_open_unit(f)?;
        let s = f.sqrt();
        Ok((self.w_raw(s)? / (2.0 * s) / self.normalization()?).max(0.0))
    }

    /// ⟨(√F)^m⟩ of the normalized curve.
    pub fn moment(&self, m: u32) -> Result<f64> {
        Ok(self.raw_moment(m)? / self.normalization()?)
    }

    pub fn curve(&self, grid: &[f64]) -> Result<DistributionCurve> {
        let norm = self.normalization()?;
        let pdf = grid.iter().map(|&f| self.pdf(f)).collect::<Result<Vec<_>>>()?;
        let mut c = DistributionCurve::new(format!("sym-nk(N={},K={})", self.n, self.k), grid.to_vec(), pdf, Provenance::Quadrature);
        c.normalization = norm;
        Ok(c)
    }
}

/// P_{N,K}(F) for two independent μ_{N,K} states, 2 ≤ N ≤ K.
pub fn pdf_fidelity_nk(f: f64, n: usize, k: usize, cfg: &WConfig) -> Result<f64> {
    WPipelineState::new(n, k, *cfg)?.pdf(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::rgamma;
    use std::f64::consts::PI;

    #[test]
    fn pure_bures_qubit_closed_form() {
        let v = pdf_pure_bures(2, 0.5, &QuadConfig::default()).unwrap();
        assert!((v - 4.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn qubit_integral_form() {
        let cfg = QuadConfig::tight();
        for &f in &[0.1f64, 0.5, 0.85] {
            let a = (1.0 - 2.0 * f).acos();
            let s = (f * (1.0 - f)).sqrt();
            let hs = 4.5 * f * (1.0 - f) - 2.25 * s * (1.0 - 2.0 * f) * a;
            assert!((pdf_fidelity_2k_integral(f, 2.0, &cfg).unwrap() - hs).abs() < 1e-9);
        }
        assert_eq!(pdf_fidelity_2k_integral(0.3, 1.0, &cfg).unwrap(), 1.0);
    }

    #[test]
    fn cut_value_matches_deformed_contour() {
        let cfg = QuadConfig::default().with_tol(1e-14, 1e-12);
        for &(n, k, x) in &[(2usize, 2usize, 2.7f64), (3, 3, 3.5), (2, 3, 5.0)] {
            let a = im_z_minus(x, n, k, &cfg).unwrap();
            let b = det_of(&entries_complex(C64::new(-x, 0.0), -1.0, n, k, &cfg).unwrap(), n).im;
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-300), "({n},{k},{x}): {a} vs {b}");
        }
    }

    #[test]
    fn elementary_entries_match_integrals() {
        let cfg = QuadConfig::default().with_tol(1e-15, 1e-13);
        for &(n, k) in &[(2usize, 2usize), (3, 3), (2, 4), (4, 4)] {
            for mu in [C64::new(-1.0, 0.5), C64::new(-2.3, 1e-3), C64::new(-0.4, -2.0), C64::new(-7.0, 3.0)] {
                let sigma = if mu.im < 0.0 { -1.0 } else { 1.0 };
                let a = entries_complex(mu, sigma, n, k, &cfg).unwrap();
                let b = entries_closed(mu, n, k);
                for i in 0..n * n {
                    assert!((a[i] - b[i]).norm() <= 1e-9 * a[i].norm(), "({n},{k}) {mu} entry {i}: {} vs {}", a[i], b[i]);
                }
            }
        }
        for &x in &[2.05f64, 3.0, 8.0] {
            let a = im_z_minus(x, 3, 3, &cfg).unwrap();
            let b = z_on_cut(x, true, 3, 3).im;
            assert!((a - b).abs() <= 1e-8 * b.abs(), "x = {x}: {a} vs {b}");
        }
    }

    #[test]
    fn z_at_origin_is_det_x() {
        let cfg = QuadConfig::default().with_tol(1e-14, 1e-12);
        let st = WPipelineState::new(3, 3, WConfig::default()).unwrap();
        let z = z_complex(C64::new(0.0, 0.0), 3, 3, &cfg).unwrap();
        assert!((z.re / st.z0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kernel_matches_power_series() {
        let st = WPipelineState::new(2, 2, WConfig::default()).unwrap();
        for z in [C64::new(0.3, 0.0), C64::new(1.5, 0.2), C64::new(-1.2, 0.7)] {
            let mut s = C64::new(0.0, 0.0);
            let mut p = C64::new(1.0, 0.0);
            let mut fact = 1.0;
            for j in 0..60 {
                if j > 0 {
                    fact *= j as f64;
                    p *= -z;
                }
                let g = rgamma(4.0 - (j as f64 + 1.0) / 2.0);
                s += p * (g * g / fact);
            }
            assert!((st.kernel_i(z) - s).norm() < 1e-12, "{z}");
        }
        assert!(st.kernel_i(C64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn w_pipeline_qubit_point() {
        let st = WPipelineState::new(2, 2, WConfig::default()).unwrap();
        let f: f64 = 0.5;
        let p = st.w_raw(f.sqrt()).unwrap() / (2.0 * f.sqrt());
        assert!((p - 1.125).abs() < 1e-6, "{p}");
    }

    #[test]
    fn w_contour_radius_independent() {
        let st = WPipelineState::new(3, 3, WConfig::default()).unwrap();
        let w = |rho| st.w_parts(0.8, rho).map(|(c, r)| c + r).unwrap();
        let a = w(2.25);
        assert!((a - w(2.45)).abs() < 1e-8 * a, "{a}");
    }

    #[test]
    fn w_normalization_and_mean() {
        let st = WPipelineState::new(3, 3, WConfig::default()).unwrap();
        assert!((st.normalization().unwrap() - 1.0).abs() < 1e-9);
        let exact = crate::analytic::mean_root_fidelity_nk(3, 3.0).unwrap();
        assert!((st.moment(1).unwrap() - exact).abs() < 1e-9);
    }
}
