//! Moments ⟨(√F)^m⟩ from the determinant generating functions Z(λ) (K ≥ N)
//! and Z_K(λ) (K < N), expanded exactly.
//!
//! Every entry is Γ(K)² (or Γ(N−K)²) times a power series in λ whose
//! coefficients are rationals in K, with the odd orders carrying one factor
//! s = (Γ(c+1/2)/Γ(c))². The determinant is expanded over that ring, so each
//! series coefficient is an exact polynomial in s; only s itself is inexact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{g_const, Provenance};
use crate::error::{Error, Result};
use crate::special::{f64_to_rational, gamma_ratio_sq, pi_rational, rational_to_f64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    /// Decimal digits carried for π when s is a rational multiple of π^{±1}.
    pub digits: u32,
    /// Largest acceptable relative error after cancellation.
    pub max_rel_error: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig { digits: 40, max_rel_error: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub m: u32,
    pub value: f64,
    pub error: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub n: usize,
    pub k: f64,
    pub entries: Vec<MomentEntry>,
}

impl MomentTable {
    pub fn get(&self, m: u32) -> Option<f64> {
        self.entries.iter().find(|e| e.m == m).map(|e| e.value)
    }

    pub fn entry(&self, m: u32) -> Option<&MomentEntry> {
        self.entries.iter().find(|e| e.m == m)
    }

    /// Moments within [0,1] and non-increasing in m.
    pub fn is_consistent(&self, tol: f64) -> bool {
        self.entries.iter().all(|e| e.value >= -tol && e.value <= 1.0 + tol)
            && self.entries.windows(2).all(|w| w[1].value <= w[0].value + tol)
    }
}

type Rat = BigRational;
/// Polynomial in s, index = power.
type Poly = Vec<Rat>;
/// Truncated power series in λ with polynomial coefficients.
type Ser = Vec<Poly>;

fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

fn poly_add_assign(a: &mut Poly, b: &Poly, sign: bool) {
    if a.len() < b.len() {
        a.resize(b.len(), Rat::zero());
    }
    for (x, y) in a.iter_mut().zip(b) {
        if sign {
            *x += y;
        } else {
            *x -= y;
        }
    }
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn poly_scale(a: &Poly, c: &Rat) -> Poly {
    a.iter().map(|x| x * c).collect()
}

fn ser_mul(a: &Ser, b: &Ser, order: usize) -> Ser {
    let mut out: Ser = vec![Vec::new(); order + 1];
    for i in 0..=order {
        for j in 0..=order - i {
            if a[i].is_empty() || b[j].is_empty() {
                continue;
            }
            let p = poly_mul(&a[i], &b[j]);
            poly_add_assign(&mut out[i + j], &p, true);
        }
    }
    out
}

/// The λ⁰ coefficient as a plain rational (it never involves s).
fn constant_term(a: &Ser) -> Rat {
    a[0].first().cloned().unwrap_or_else(Rat::zero)
}

fn ser_inv(a: &Ser, order: usize) -> Ser {
    let a0 = constant_term(a);
    let inv0 = Rat::one() / &a0;
    let mut b: Ser = vec![Vec::new(); order + 1];
    b[0] = vec![inv0.clone()];
    for m in 1..=order {
        let mut acc: Poly = Vec::new();
        for j in 1..=m {
            if a[j].is_empty() || b[m - j].is_empty() {
                continue;
            }
            let p = poly_mul(&a[j], &b[m - j]);
            poly_add_assign(&mut acc, &p, true);
        }
        b[m] = poly_scale(&acc, &(-&inv0));
    }
    b
}

/// Determinant of a matrix of series, by elimination with pivots chosen on
/// the λ⁰ coefficient (the λ⁰ matrix is nonsingular).
fn ser_det(mut a: Vec<Vec<Ser>>, order: usize) -> Result<Ser> {
    let n = a.len();
    let mut det: Ser = vec![Vec::new(); order + 1];
    det[0] = vec![Rat::one()];
    let mut negate = false;
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| {
            let (x, y) = (constant_term(&a[i][c]).abs(), constant_term(&a[j][c]).abs());
            x.cmp(&y)
        });
        let p = piv.expect("non-empty range");
        if constant_term(&a[p][c]).is_zero() {
            return Err(Error::IllConditioned(f64::INFINITY));
        }
        if p != c {
            a.swap(p, c);
            negate = !negate;
        }
        let inv = ser_inv(&a[c][c], order);
        for r in c + 1..n {
            if a[r][c].iter().all(|p| p.iter().all(Zero::is_zero)) {
                continue;
            }
            let factor = ser_mul(&a[r][c], &inv, order);
            for col in c..n {
                let prod = ser_mul(&factor, &a[c][col], order);
                for (x, y) in a[r][col].iter_mut().zip(&prod) {
                    poly_add_assign(x, y, false);
                }
            }
        }
        det = ser_mul(&det, &a[c][c], order);
    }
    if negate {
        for p in det.iter_mut() {
            for x in p.iter_mut() {
                *x = -x.clone();
            }
        }
    }
    Ok(det)
}

/// Γ(x+s)/Γ(x) for integer s (negative s gives 1/((x−1)⋯(x+s))).
fn poch(x: &Rat, s: i64) -> Result<Rat> {
    let mut v = Rat::one();
    if s >= 0 {
        for i in 0..s {
            v *= x + rat(i);
        }
    } else {
        for i in 1..=-s {
            let d = x - rat(i);
            if d.is_zero() {
                return Err(Error::Domain("gamma pole in a generating-function entry".into()));
            }
            v /= d;
        }
    }
    Ok(v)
}

fn factorial(m: usize) -> Rat {
    (1..=m as i64).fold(Rat::one(), |a, i| a * rat(i))
}

fn signed_inv_factorial(m: usize) -> Rat {
    let f = Rat::one() / factorial(m);
    if m % 2 == 1 {
        -f
    } else {
        f
    }
}

fn coeff_poly(c: Rat, odd: bool) -> Poly {
    if odd {
        vec![Rat::zero(), c]
    } else {
        vec![c]
    }
}

/// Entries of Z(λ) with column l divided by Γ(K+l−N)², which leaves the
/// moment ratios z_m/z_0 unchanged. With x = K+l−N and y = x + m/2 the
/// entry is Γ(y)²(y)_{k−1}/Γ(x)²: for even m, Γ(y)/Γ(x) is the rising
/// factorial (x)_{m/2}; for odd m it is √s (K+½)_{l−N+j} Γ(K)/Γ(x), and
/// Γ(K)/Γ(x) = (K−1)⋯(K+l−N) is a polynomial. No entry has a pole at
/// integer K < N.
fn z_entries(dim: usize, k: &Rat, order: usize) -> Result<Vec<Vec<Ser>>> {
    let kh = k + Rat::new(BigInt::one(), BigInt::from(2));
    let nn = dim as i64;
    let mut mat = Vec::with_capacity(dim);
    for kk in 1..=nn {
        let mut row = Vec::with_capacity(dim);
        for l in 1..=nn {
            let q = l - nn;
            let x = k + rat(q);
            let inv_poch_q = (1..=-q).fold(Rat::one(), |a, i| a * (k - rat(i)));
            let mut ser: Ser = Vec::with_capacity(order + 1);
            for m in 0..=order {
                let j = (m / 2) as i64;
                let odd = m % 2 == 1;
                let (ratio, y) = if odd {
                    (poch(&kh, q + j)? * &inv_poch_q, &kh + rat(q + j))
                } else {
                    (poch(&x, j)?, &x + rat(j))
                };
                let c = &ratio * &ratio * poch(&y, kk - 1)? * signed_inv_factorial(m);
                ser.push(coeff_poly(c, odd));
            }
            row.push(ser);
        }
        mat.push(row);
    }
    Ok(mat)
}

/// Γ(y)/Γ(y+d) for integer d.
fn gamma_shift_ratio(y: &Rat, d: i64) -> Rat {
    let mut v = Rat::one();
    if d >= 0 {
        for i in 0..d {
            v /= y + rat(i);
        }
    } else {
        for i in 1..=-d {
            v *= y - rat(i);
        }
    }
    v
}

/// Entries of Z_K(λ) divided by Γ(N−K)².
fn zk_entries(dim: usize, kdim: usize, order: usize) -> Result<Vec<Vec<Ser>>> {
    let a = rat(dim as i64 - kdim as i64);
    let ah = &a + Rat::new(BigInt::one(), BigInt::from(2));
    let d = dim as i64 - 2 * kdim as i64 + 1;
    let kk_max = kdim as i64;
    let mut mat = Vec::with_capacity(kdim);
    for kk in 1..=kk_max {
        let mut row = Vec::with_capacity(kdim);
        for l in 1..=kk_max {
            let mut ser: Ser = Vec::with_capacity(order + 1);
            for m in 0..=order {
                let j = (m / 2) as i64;
                let odd = m % 2 == 1;
                let base = if odd { &ah } else { &a };
                let g = poch(base, kk + j)?;
                let y = Rat::new(BigInt::from(m as i64), BigInt::from(2)) + rat(kk + l - 1);
                let c = &g * &g * gamma_shift_ratio(&y, d) * signed_inv_factorial(m);
                ser.push(coeff_poly(c, odd));
            }
            row.push(ser);
        }
        mat.push(row);
    }
    Ok(mat)
}

/// s = (Γ(c+1/2)/Γ(c))² as an exact rational when 2c is an integer, using
/// π to the configured number of digits.
fn s_exact(c: f64, digits: u32) -> Option<Rat> {
    let two_c = 2.0 * c;
    if two_c != two_c.round() || c <= 0.0 || c > 200.0 {
        return None;
    }
    let pi = pi_rational(digits);
    if c == c.round() {
        // Γ(c+1/2)/Γ(c) = (2c)! √π / (4^c c! (c−1)!)
        let ci = c as usize;
        let r = factorial(2 * ci) / (factorial(ci) * factorial(ci - 1) * Rat::from_integer(BigInt::from(4).pow(ci as u32)));
        Some(&r * &r * pi)
    } else {
        // c = h + 1/2: Γ(h+1)/Γ(h+1/2) = h! 4^h h! / ((2h)! √π)
        let h = (c - 0.5).round() as usize;
        let r = factorial(h) * factorial(h) * Rat::from_integer(BigInt::from(4).pow(h as u32)) / factorial(2 * h);
        Some(&r * &r / pi)
    }
}

struct Evaluated {
    value: f64,
    rel_error: f64,
}

/// Σ_r Q_r s^r with a cancellation-aware error estimate.
fn evaluate_poly(q: &Poly, s_f: f64, s_ex: Option<&Rat>, digits: u32) -> Evaluated {
    let mut abs_sum = 0.0;
    let mut s_pow = 1.0;
    for c in q {
        abs_sum += (rational_to_f64(c) * s_pow).abs();
        s_pow *= s_f;
    }
    let (value, base_err) = match s_ex {
        Some(s) => {
            let mut acc = Rat::zero();
            let mut p = Rat::one();
            for c in q {
                acc += c * &p;
                p *= s;
            }
            (rational_to_f64(&acc), 10f64.powi(-(digits as i32)) * q.len() as f64)
        }
        None => {
            // Horner in f64; s carries ~1e-15 relative error per power
            let v = q.iter().rev().fold(0.0, |acc, c| acc * s_f + rational_to_f64(c));
            (v, 4.0 * f64::EPSILON * q.len().max(1) as f64)
        }
    };
    let cancel = if value != 0.0 { abs_sum / value.abs() } else { f64::INFINITY };
    Evaluated { value, rel_error: (cancel * base_err).max(f64::EPSILON) }
}

fn moments_from_det(
    det: &Ser,
    dim: usize,
    k: f64,
    m_max: u32,
    s_f: f64,
    s_ex: Option<&Rat>,
    cfg: &SeriesConfig,
    prov: Provenance,
) -> Result<MomentTable> {
    let z0 = constant_term(det);
    if z0.is_zero() {
        return Err(Error::IllConditioned(f64::INFINITY));
    }
    let mut entries = vec![MomentEntry { m: 0, value: 1.0, error: 0.0, provenance: prov }];
    for m in 1..=m_max {
        // (−d/dλ)^m Z/Z(0) at 0 = (−1)^m m! z_m / z_0
        let scale = factorial(m as usize) / &z0 * if m % 2 == 1 { rat(-1) } else { rat(1) };
        let q: Poly = det[m as usize].iter().map(|c| c * &scale).collect();
        let ev = evaluate_poly(&q, s_f, s_ex, cfg.digits);
        if ev.rel_error > cfg.max_rel_error {
            return Err(Error::TruncationUnstable(ev.rel_error));
        }
        let g = g_const(dim, k, m);
        let value = g * ev.value;
        entries.push(MomentEntry { m, value, error: (value * ev.rel_error).abs() + value.abs() * 1e-15, provenance: prov });
    }
    Ok(MomentTable { n: dim, k, entries })
}

fn check_args(dim: usize, k: f64, m_max: u32) -> Result<()> {
    if dim == 0 || !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!("need N >= 1 and K > 0, got N = {dim}, K = {k}")));
    }
    if m_max > 8 {
        return Err(Error::InvalidSpec(format!("m_max = {m_max} exceeds 8")));
    }
    Ok(())
}

/// Moments from Z(λ), the N×N generating function (any real K away from poles).
pub fn moments_series_z(dim: usize, k: f64, m_max: u32, cfg: &SeriesConfig) -> Result<MomentTable> {
    check_args(dim, k, m_max)?;
    let kr = f64_to_rational(k);
    let det = ser_det(z_entries(dim, &kr, m_max as usize)?, m_max as usize)?;
    let s_f = gamma_ratio_sq(k + 0.5, k);
    let s_ex = s_exact(k, cfg.digits);
    let prov = if k < dim as f64 { Provenance::Continued } else { Provenance::Series };
    moments_from_det(&det, dim, k, m_max, s_f, s_ex.as_ref(), cfg, prov)
}

/// Moments from Z_K(λ), the K×K generating function for integer K, N ≥ 2K.
pub fn moments_series_zk(dim: usize, kdim: usize, m_max: u32, cfg: &SeriesConfig) -> Result<MomentTable> {
    check_args(dim, kdim as f64, m_max)?;
    if 2 * kdim > dim {
        return Err(Error::Domain(format!("Z_K route needs N >= 2K, got N = {dim}, K = {kdim}")));
    }
    let det = ser_det(zk_entries(dim, kdim, m_max as usize)?, m_max as usize)?;
    let c = (dim - kdim) as f64;
    let s_f = gamma_ratio_sq(c + 0.5, c);
    let s_ex = s_exact(c, cfg.digits);
    moments_from_det(&det, dim, kdim as f64, m_max, s_f, s_ex.as_ref(), cfg, Provenance::SeriesZk)
}

/// ⟨(√F)^m⟩_{N,K} for m = 0..=m_max: Z_K route for integer K with
/// N ≥ 2K, the Z route otherwise (continued in K when K < N).
pub fn moment_root_fidelity_series(dim: usize, k: f64, m_max: u32, cfg: &SeriesConfig) -> Result<MomentTable> {
    check_args(dim, k, m_max)?;
    if 2.0 * k <= dim as f64 && k == k.round() {
        moments_series_zk(dim, k as usize, m_max, cfg)
    } else {
        moments_series_z(dim, k, m_max, cfg)
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{mean_fidelity_nk, mean_root_fidelity_nk};

    #[test]
    fn z_route_through_integer_k_below_n() {
        let cfg = SeriesConfig::default();
        for (n, k) in [(3usize, 1usize), (4, 2), (6, 2), (6, 3)] {
            let a = moments_series_z(n, k as f64, 4, &cfg).unwrap();
            let b = moments_series_zk(n, k, 4, &cfg).unwrap();
            for m in 1..=4 {
                assert!((a.get(m).unwrap() - b.get(m).unwrap()).abs() < 1e-10, "({n},{k}) m={m}");
            }
        }
        assert!(moments_series_zk(3, 2, 2, &cfg).is_err());
    }

    #[test]
    fn z_route_matches_x_route() {
        let cfg = SeriesConfig::default();
        for (n, k) in [(2usize, 2.0), (2, 1.5), (3, 3.0), (3, 4.0), (2, 2.7)] {
            let t = moments_series_z(n, k, 2, &cfg).unwrap();
            assert!((t.get(1).unwrap() - mean_root_fidelity_nk(n, k).unwrap()).abs() < 1e-10, "({n},{k})");
            assert!((t.get(2).unwrap() - mean_fidelity_nk(n, k).unwrap()).abs() < 1e-10, "({n},{k})");
        }
    }

    #[test]
    fn zk_route_matches_x_route() {
        let cfg = SeriesConfig::default();
        for (n, k) in [(4usize, 2usize), (5, 2), (3, 1), (6, 2)] {
            let t = moments_series_zk(n, k, 2, &cfg).unwrap();
            assert!((t.get(1).unwrap() - mean_root_fidelity_nk(n, k as f64).unwrap()).abs() < 1e-10, "({n},{k})");
            assert!((t.get(2).unwrap() - mean_fidelity_nk(n, k as f64).unwrap()).abs() < 1e-10, "({n},{k})");
        }
    }

    #[test]
    fn higher_moments_are_ordered() {
        let t = moment_root_fidelity_series(3, 3.0, 8, &SeriesConfig::default()).unwrap();
        assert!(t.is_consistent(1e-12), "{t:?}");
    }
}
