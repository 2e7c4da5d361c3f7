//! Adaptive Gauss–Kronrod (G10/K21) quadrature with optional endpoint
//! substitutions for the algebraic/log singularities that show up in the
//! fidelity densities.

use std::collections::BinaryHeap;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndpointSubstitution {
    None,
    /// x = a + (b-a) sin²θ, removes inverse square roots at both ends.
    SqrtSingularity,
    /// Double smoothstep map; clusters nodes strongly at both ends.
    LogSingularity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub endpoint_substitution: EndpointSubstitution,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-9,
            rel_tol: 1e-8,
            max_subdivisions: 2000,
            endpoint_substitution: EndpointSubstitution::None,
        }
    }
}

impl QuadConfig {
    pub fn tight() -> Self {
        QuadConfig { abs_tol: 1e-13, rel_tol: 1e-12, ..Default::default() }
    }

    pub fn with_substitution(mut self, s: EndpointSubstitution) -> Self {
        self.endpoint_substitution = s;
        self
    }

    pub fn with_tol(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub abs_error: f64,
    pub evaluations: usize,
}

pub trait QuadValue: Copy {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn scale(self, c: f64) -> Self;
}

macro_rules! scalar_quad_value {
    ($t:ty, $zero:expr, $mag:expr) => {
        impl QuadValue for $t {
            fn zero() -> Self {
                $zero
            }
            fn magnitude(&self) -> f64 {
                $mag(self)
            }
            fn add(self, o: Self) -> Self {
                self + o
            }
            fn sub(self, o: Self) -> Self {
                self - o
            }
            fn scale(self, c: f64) -> Self {
                self * c
            }
        }
    };
}

scalar_quad_value!(f64, 0.0, |x: &f64| x.abs());
scalar_quad_value!(Complex<f64>, Complex::new(0.0, 0.0), |x: &Complex<f64>| x.norm());

impl<T: QuadValue, const M: usize> QuadValue for [T; M] {
    fn zero() -> Self {
        [T::zero(); M]
    }
    fn magnitude(&self) -> f64 {
        self.iter().fold(0.0, |m, x| m.max(x.magnitude()))
    }
    fn add(mut self, o: Self) -> Self {
        for (x, y) in self.iter_mut().zip(o) {
            *x = x.add(y);
        }
        self
    }
    fn sub(mut self, o: Self) -> Self {
        for (x, y) in self.iter_mut().zip(o) {
            *x = x.sub(y);
        }
        self
    }
    fn scale(mut self, c: f64) -> Self {
        for x in self.iter_mut() {
            *x = x.scale(c);
        }
        self
    }
}

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

fn gk21<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc.scale(WGK[10]);
    let mut g = T::zero();
    for i in 0..10 {
        let dx = h * XGK[i];
        let s = f(c - dx).add(f(c + dx));
        k = k.add(s.scale(WGK[i]));
        if i % 2 == 1 {
            g = g.add(s.scale(WG[i / 2]));
        }
    }
    let kv = k.scale(h);
    let gv = g.scale(h);
    let err = kv.sub(gv).magnitude();
    (kv, err)
}

struct Seg<T> {
    a: f64,
    b: f64,
    val: T,
    err: f64,
}

impl<T> PartialEq for Seg<T> {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl<T> Eq for Seg<T> {}
impl<T> PartialOrd for Seg<T> {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl<T> Ord for Seg<T> {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

fn adapt<T: QuadValue, F: FnMut(f64) -> T>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult<T>> {
    if a == b {
        return Ok(QuadResult { value: T::zero(), abs_error: 0.0, evaluations: 0 });
    }
    let mut heap = BinaryHeap::new();
    let (v, e) = gk21(&mut f, a, b);
    let mut total = v;
    let mut total_err = e;
    heap.push(Seg { a, b, val: v, err: e });
    let mut evals = 21;
    let mut splits = 0;
    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.magnitude());
        if total_err <= tol {
            break;
        }
        if splits >= cfg.max_subdivisions {
            if total_err <= 1e3 * tol {
                break;
            }
            return Err(Error::QuadratureFailure(format!(
                "no convergence on [{a}, {b}] after {splits} subdivisions (error {total_err:.3e})"
            )));
        }
        let seg = heap.pop().expect("non-empty");
        let m = 0.5 * (seg.a + seg.b);
        if m <= seg.a.min(seg.b) || m >= seg.a.max(seg.b) {
            // interval cannot be split further in f64
            total_err -= seg.err;
            heap.push(Seg { err: 0.0, ..seg });
            if heap.iter().all(|s| s.err == 0.0) {
                break;
            }
            continue;
        }
        let (v1, e1) = gk21(&mut f, seg.a, m);
        let (v2, e2) = gk21(&mut f, m, seg.b);
        evals += 42;
        splits += 1;
        total = total.sub(seg.val).add(v1).add(v2);
        total_err = total_err - seg.err + e1 + e2;
        heap.push(Seg { a: seg.a, b: m, val: v1, err: e1 });
        heap.push(Seg { a: m, b: seg.b, val: v2, err: e2 });
        if !total.magnitude().is_finite() {
            return Err(Error::QuadratureFailure("non-finite integrand".into()));
        }
    }
    // re-sum to shed accumulated rounding
    let mut value = T::zero();
    let mut err = 0.0;
    for s in heap.iter() {
        value = value.add(s.val);
        err += s.err;
    }
    Ok(QuadResult { value, abs_error: err, evaluations: evals })
}

fn smoothstep(t: f64) -> (f64, f64) {
    (t * t * (3.0 - 2.0 * t), 6.0 * t * (1.0 - t))
}

/// ∫_a^b f over a finite interval, applying the configured substitution.
pub fn integrate_generic<T: QuadValue, F: FnMut(f64) -> T>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult<T>> {
    let w = b - a;
    match cfg.endpoint_substitution {
        EndpointSubstitution::None => adapt(f, a, b, cfg),
        EndpointSubstitution::SqrtSingularity => adapt(
            |th: f64| {
                let s = th.sin();
                let c = th.cos();
                let x = a + w * s * s;
                let jac = w * 2.0 * s * c;
                if jac == 0.0 {
                    T::zero()
                } else {
                    f(x).scale(jac)
                }
            },
            0.0,
            std::f64::consts::FRAC_PI_2,
            cfg,
        ),
        EndpointSubstitution::LogSingularity => adapt(
            |t: f64| {
                let (u, du) = smoothstep(t);
                let (v, dv) = smoothstep(u);
                let jac = w * dv * du;
                if jac == 0.0 {
                    T::zero()
                } else {
                    f(a + w * v).scale(jac)
                }
            },
            0.0,
            1.0,
            cfg,
        ),
    }
}

pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult<f64>> {
    integrate_generic(f, a, b, cfg)
}

pub fn integrate_complex<F: FnMut(f64) -> Complex<f64>>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult<Complex<f64>>> {
    integrate_generic(f, a, b, cfg)
}

/// ∫_a^∞ f via x = a + t/(1-t).
pub fn integrate_to_infinity<T: QuadValue, F: FnMut(f64) -> T>(mut f: F, a: f64, cfg: &QuadConfig) -> Result<QuadResult<T>> {
    let inner = QuadConfig { endpoint_substitution: EndpointSubstitution::None, ..*cfg };
    adapt(
        |t: f64| {
            if t >= 1.0 {
                return T::zero();
            }
            let om = 1.0 - t;
            let x = a + t / om;
            f(x).scale(1.0 / (om * om))
        },
        0.0,
        1.0,
        &inner,
    )
}

/// Sum of integrals over consecutive breakpoints.
pub fn integrate_pieces<T: QuadValue, F: FnMut(f64) -> T>(mut f: F, points: &[f64], cfg: &QuadConfig) -> Result<QuadResult<T>> {
    let mut value = T::zero();
    let mut err = 0.0;
    let mut evals = 0;
    for w in points.windows(2) {
        let r = integrate_generic(&mut f, w[0], w[1], cfg)?;
        value = value.add(r.value);
        err += r.abs_error;
        evals += r.evaluations;
    }
    Ok(QuadResult { value, abs_error: err, evaluations: evals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x.powi(7) - 3.0 * x * x, 0.0, 2.0, &QuadConfig::tight()).unwrap();
        assert!((r.value - (32.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn sqrt_endpoint() {
        let cfg = QuadConfig::tight().with_substitution(EndpointSubstitution::SqrtSingularity);
        let r = integrate(|x| 1.0 / (x * (1.0 - x)).sqrt(), 0.0, 1.0, &cfg).unwrap();
        assert!((r.value - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn log_endpoint() {
        let cfg = QuadConfig::tight().with_substitution(EndpointSubstitution::LogSingularity);
        let r = integrate(|x: f64| x.ln(), 0.0, 1.0, &cfg).unwrap();
        assert!((r.value + 1.0).abs() < 1e-10);
    }

    #[test]
    fn semi_infinite() {
        let r = integrate_to_infinity(|x: f64| (-x).exp(), 0.0, &QuadConfig::tight()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let r = integrate_to_infinity(|x: f64| 1.0 / (1.0 + x * x), 0.0, &QuadConfig::tight()).unwrap();
        assert!((r.value - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    }

    #[test]
    fn legendre_rule() {
        let (x, w) = gauss_legendre(20);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(39)).sum();
        assert!((m - 1.0 / 40.0).abs() < 1e-14);
    }

    #[test]
    fn array_integrand() {
        let r = integrate_generic(|x: f64| [x, x * x], 0.0, 1.0, &QuadConfig::tight()).unwrap();
        assert!((r.value[0] - 0.5).abs() < 1e-14 && (r.value[1] - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn complex_integrand() {
        let r = integrate_complex(|t| Complex::new(0.0, t).exp(), 0.0, std::f64::consts::PI, &QuadConfig::tight()).unwrap();
        assert!((r.value - Complex::new(0.0, 2.0)).norm() < 1e-12);
    }
}
