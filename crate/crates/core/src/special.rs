//! Gamma-function helpers in log space, plus a few exact constants.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// ln|Γ(x)| and the sign of Γ(x). Poles give (+inf, 1).
pub fn lgamma_signed(x: f64) -> (f64, f64) {
    if is_nonpositive_int(x) {
        return (f64::INFINITY, 1.0);
    }
    let (v, s) = libm::lgamma_r(x);
    (v, if s < 0 { -1.0 } else { 1.0 })
}

pub fn ln_gamma(x: f64) -> f64 {
    lgamma_signed(x).0
}

pub fn is_nonpositive_int(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// 1/Γ(x), zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_int(x) {
        return 0.0;
    }
    if x > 0.0 && x < 170.0 {
        return 1.0 / libm::tgamma(x);
    }
    let (l, s) = lgamma_signed(x);
    s * (-l).exp()
}

pub fn gamma(x: f64) -> f64 {
    if is_nonpositive_int(x) {
        return f64::NAN;
    }
    if x.abs() < 170.0 {
        return libm::tgamma(x);
    }
    let (l, s) = lgamma_signed(x);
    s * l.exp()
}

/// Γ(a)/Γ(b) formed in log space. Returns 0 when b is a pole and a is not.
pub fn gamma_ratio(a: f64, b: f64) -> f64 {
    if is_nonpositive_int(b) {
        return if is_nonpositive_int(a) { f64::NAN } else { 0.0 };
    }
    if is_nonpositive_int(a) {
        return f64::INFINITY;
    }
    let (la, sa) = lgamma_signed(a);
    let (lb, sb) = lgamma_signed(b);
    sa * sb * (la - lb).exp()
}

/// Squared ratio (Γ(a)/Γ(b))², with the same pole conventions.
pub fn gamma_ratio_sq(a: f64, b: f64) -> f64 {
    let r = gamma_ratio(a, b);
    r * r
}

pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Regularized lower incomplete beta I_x(a, b) by continued fraction (Lentz).
pub fn beta_inc(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    if x > (a + 1.0) / (a + b + 2.0) {
        return 1.0 - beta_inc(b, a, 1.0 - x);
    }
    let tiny = 1e-300;
    let mut c = 1.0;
    let mut d = 1.0 - (a + b) * x / (a + 1.0);
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let num = m * (b - m) * x / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
        for num in [num, -(a + m) * (a + b + m) * x / ((a + 2.0 * m) * (a + 2.0 * m + 1.0))] {
            d = 1.0 + num * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = 1.0 + num / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            h *= d * c;
        }
        if (d * c - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (ln_front.exp() * h / a).clamp(0.0, 1.0)
}

/// Exact value of a finite f64 as a rational (dyadic).
pub fn f64_to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    let n = q.numer();
    let d = q.denom();
    if n.is_zero() {
        return 0.0;
    }
    // keep 64 significant bits in the integer quotient
    let k = 64 - (n.bits() as i64 - d.bits() as i64);
    let quot = if k >= 0 { (n << k as usize) / d } else { n / (d << (-k) as usize) };
    libm::scalbn(quot.to_f64().unwrap_or(f64::NAN), -k as i32)
}

/// H_n = 1 + 1/2 + ... + 1/n as an exact rational.
pub fn harmonic(n: u64) -> BigRational {
    let mut h = BigRational::zero();
    for i in 1..=n {
        h += BigRational::new(BigInt::one(), BigInt::from(i));
    }
    h
}

/// π to roughly `digits` decimal digits as a rational (Machin's formula).
pub fn pi_rational(digits: u32) -> BigRational {
    let scale = BigInt::from(10u32).pow(digits + 10);
    let arctan_inv = |x: u64| -> BigInt {
        let x = BigInt::from(x);
        let x2 = &x * &x;
        let mut power = &scale / &x;
        let mut sum = power.clone();
        let mut k = 1u64;
        loop {
            power = &power / &x2;
            if power.is_zero() {
                break;
            }
            let term = &power / BigInt::from(2 * k + 1);
            if k % 2 == 1 {
                sum -= term;
            } else {
                sum += term;
            }
            k += 1;
        }
        sum
    };
    let pi = BigInt::from(16) * arctan_inv(5) - BigInt::from(4) * arctan_inv(239);
    BigRational::new(pi, scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_ratios() {
        assert!((gamma_ratio(2.5, 2.0) - 1.329_340_388_179_137).abs() < 1e-14);
        assert_eq!(rgamma(-2.0), 0.0);
        assert_eq!(gamma_ratio(1.5, 0.0), 0.0);
        assert!((gamma(-0.5) + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-13);
        assert!((gamma_ratio(300.5, 300.0) - 300f64.sqrt() * (1.0 - 1.0 / 2400.0 + 1.0 / (128.0 * 90000.0))).abs() < 1e-7);
    }

    #[test]
    fn pi_digits() {
        let p = pi_rational(40);
        assert!((rational_to_f64(&p) - std::f64::consts::PI).abs() < 1e-15);
        let s = (p * BigRational::from_integer(BigInt::from(10).pow(38))).floor();
        assert_eq!(s.to_integer().to_string(), "314159265358979323846264338327950288419");
    }

    #[test]
    fn incomplete_beta() {
        assert!((beta_inc(2.0, 2.0, 0.5) - 0.5).abs() < 1e-14);
        // I_x(1,b) = 1-(1-x)^b
        assert!((beta_inc(1.0, 3.0, 0.3) - (1.0 - 0.7f64.powi(3))).abs() < 1e-14);
    }

    #[test]
    fn rational_conversion_extremes() {
        let big = BigRational::new(BigInt::from(3) * BigInt::from(10).pow(400), BigInt::from(7) * BigInt::from(10).pow(399));
        assert!((rational_to_f64(&big) - 30.0 / 7.0).abs() < 1e-14);
    }
}
