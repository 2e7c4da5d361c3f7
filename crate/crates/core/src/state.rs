//! Density matrices, pure states, Bloch vectors and the fidelity/distance
//! metrics between them.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Numerical tolerances shared by validation and metric identities.
pub mod tol {
    /// Hermiticity / trace / negative-eigenvalue slack when validating.
    pub const VALIDITY: f64 = 1e-12;
    /// Agreement expected between equivalent metric formulas.
    pub const METRIC: f64 = 1e-10;
}

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

/// Spectral decomposition of a Hermitian matrix: (ascending eigenvalues, eigenvectors as columns).
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let h = hermitize(m);
    let eig = h.try_symmetric_eigen(EIG_EPS, EIG_MAX_ITER).ok_or(Error::EigenFailure)?;
    let n = eig.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    Ok((vals, vecs))
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    let h = hermitize(m);
    let vals = h.try_symmetric_eigen(EIG_EPS, EIG_MAX_ITER).ok_or(Error::EigenFailure)?.eigenvalues;
    let mut v: Vec<f64> = vals.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn from_spectrum(vals: &[f64], vecs: &CMatrix) -> CMatrix {
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (c, &v) in vals.iter().enumerate() {
        for r in 0..n {
            scaled[(r, c)] *= v;
        }
    }
    &scaled * vecs.adjoint()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl DensityMatrix {
    /// Validate a square matrix as a state. Eigenvalues in [-1e-12, 0) are
    /// clamped to zero and the trace renormalized.
    pub fn new(m: CMatrix) -> Result<Self> {
        validate_state(&m)
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let v = 1.0 / n as f64;
        DensityMatrix {
            entries: CMatrix::from_diagonal_element(n, n, C64::new(v, 0.0)),
            eigenvalues: vec![v; n],
            eigenvectors: CMatrix::identity(n, n),
        }
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        let m = CMatrix::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|&x| C64::new(x, 0.0))));
        validate_state(&m)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    /// Eigenvalues in ascending order, clamped at zero.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l * l).sum()
    }

    /// Tr √ρ
    pub fn trace_sqrt(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.sqrt()).sum()
    }

    pub fn rank(&self, threshold: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > threshold).count()
    }

    /// U ρ U†
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        let m = u * &self.entries * u.adjoint();
        let vecs = u * &self.eigenvectors;
        let entries = hermitize(&m);
        Ok(DensityMatrix { entries, eigenvalues: self.eigenvalues.clone(), eigenvectors: vecs })
    }

    /// Build from a spectrum and an orthonormal eigenbasis (no re-diagonalization).
    pub fn from_spectral(vals: Vec<f64>, vecs: CMatrix) -> Result<Self> {
        let s: f64 = vals.iter().sum();
        if vals.iter().any(|&l| l < -tol::VALIDITY) {
            return Err(Error::NotPsd(vals.iter().cloned().fold(f64::INFINITY, f64::min)));
        }
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::TraceNotOne(s));
        }
        let mut vals: Vec<f64> = vals.into_iter().map(|l| l.max(0.0) / s).collect();
        let mut idx: Vec<usize> = (0..vals.len()).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let n = vals.len();
        let vecs = CMatrix::from_fn(n, n, |r, c| vecs[(r, idx[c])]);
        vals = idx.iter().map(|&i| vals[i]).collect();
        let entries = hermitize(&from_spectrum(&vals, &vecs));
        Ok(DensityMatrix { entries, eigenvalues: vals, eigenvectors: vecs })
    }
}

pub fn validate_state(m: &CMatrix) -> Result<DensityMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimMismatch(m.nrows(), m.ncols()));
    }
    let n = m.nrows();
    let mut herm_dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            herm_dev = herm_dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if herm_dev > tol::VALIDITY {
        return Err(Error::NotHermitian(herm_dev));
    }
    let tr = m.trace().re;
    if (tr - 1.0).abs() > tol::VALIDITY {
        return Err(Error::TraceNotOne(tr));
    }
    let (mut vals, vecs) = hermitian_eigen(m)?;
    if vals[0] < -tol::VALIDITY {
        return Err(Error::NotPsd(vals[0]));
    }
    let clamped = vals.iter().any(|&l| l < 0.0);
    for l in vals.iter_mut() {
        *l = l.max(0.0);
    }
    let entries = if clamped {
        let s: f64 = vals.iter().sum();
        for l in vals.iter_mut() {
            *l /= s;
        }
        hermitize(&from_spectrum(&vals, &vecs))
    } else {
        hermitize(m)
    };
    Ok(DensityMatrix { entries, eigenvalues: vals, eigenvectors: vecs })
}

/// Hermitian PSD square root by spectral decomposition.
pub fn psd_sqrt(rho: &DensityMatrix) -> CMatrix {
    let s: Vec<f64> = rho.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    hermitize(&from_spectrum(&s, &rho.eigenvectors))
}

fn check_dims(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

/// Eigenvalues below this fraction of the largest are treated as exact
/// zeros when factoring ρ; their square roots would otherwise inject
/// O(√ε) noise into the fidelity of rank-deficient states.
const RANK_CUT: f64 = 1e-14;

/// L with ρ = L L†: columns √λ_i v_i over the numerically nonzero spectrum.
fn psd_factor(rho: &DensityMatrix) -> CMatrix {
    let n = rho.dim();
    let lmax = rho.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..n).filter(|&i| rho.eigenvalues[i] > RANK_CUT * lmax).collect();
    CMatrix::from_fn(n, keep.len(), |r, c| rho.eigenvectors[(r, keep[c])] * rho.eigenvalues[keep[c]].sqrt())
}

/// Tr √(√ρ₁ ρ₂ √ρ₁) as the nuclear norm of L₁†L₂ (ρ_i = L_i L_i†), which
/// avoids taking square roots of the near-zero eigenvalues of the product.
pub fn root_fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    check_dims(rho1, rho2)?;
    let m = psd_factor(rho1).adjoint() * psd_factor(rho2);
    let svd = m.try_svd(false, false, EIG_EPS, EIG_MAX_ITER).ok_or(Error::EigenFailure)?;
    let t: f64 = svd.singular_values.iter().sum();
    Ok(t.clamp(0.0, 1.0))
}

pub fn fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    let r = root_fidelity(rho1, rho2)?;
    Ok((r * r).clamp(0.0, 1.0))
}

fn trace_product(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    a.matrix().iter().zip(b.matrix().transpose().iter()).map(|(x, y)| (x * y).re).sum()
}

/// Two-level shortcut F = Tr ρ₁ρ₂ + √((1 − Tr ρ₁²)(1 − Tr ρ₂²)), with
/// 1 − Tr ρ² = 2 det ρ taken from the rank-cut spectrum so that pure
/// states contribute an exact zero.
pub fn fidelity_n2(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    check_dims(rho1, rho2)?;
    if rho1.dim() != 2 {
        return Err(Error::DimMismatch(rho1.dim(), 2));
    }
    let det = |r: &DensityMatrix| {
        let (a, b) = (r.eigenvalues[0], r.eigenvalues[1]);
        let lmax = a.max(b);
        let cut = |x: f64| if x > RANK_CUT * lmax { x } else { 0.0 };
        cut(a) * cut(b)
    };
    let f = trace_product(rho1, rho2) + 2.0 * (det(rho1) * det(rho2)).sqrt();
    Ok(f.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<C64>,
}

impl PureState {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let n2 = amplitudes.norm_squared();
        if (n2 - 1.0).abs() > tol::VALIDITY {
            return Err(Error::InvalidSpec(format!("squared norm {n2} is not 1")));
        }
        Ok(PureState { amplitudes })
    }

    /// Normalizes a non-zero vector.
    pub fn normalized(v: DVector<C64>) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidSpec("zero vector".into()));
        }
        Ok(PureState { amplitudes: v / C64::new(n, 0.0) })
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = DVector::zeros(n);
        v[k] = C64::new(1.0, 0.0);
        PureState { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn overlap(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn projector(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        validate_state(&m).expect("rank-one projector of a unit vector is a state")
    }
}

/// F = ⟨ψ|ρ|ψ⟩
pub fn fidelity_pure_mixed(psi: &PureState, rho: &DensityMatrix) -> Result<f64> {
    if psi.dim() != rho.dim() {
        return Err(Error::DimMismatch(psi.dim(), rho.dim()));
    }
    let v = psi.amplitudes.dotc(&(rho.matrix() * &psi.amplitudes));
    Ok(v.re.clamp(0.0, 1.0))
}

/// F(1/N, ρ) = (Tr √ρ)² / N
pub fn fidelity_max_mixed(rho: &DensityMatrix) -> f64 {
    let t = rho.trace_sqrt();
    (t * t / rho.dim() as f64).clamp(0.0, 1.0)
}

pub fn bures_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    let r = root_fidelity(rho1, rho2)?;
    Ok((2.0 - 2.0 * r).max(0.0).sqrt())
}

pub fn bures_angle(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    Ok(root_fidelity(rho1, rho2)?.clamp(0.0, 1.0).acos())
}

pub fn hs_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    check_dims(rho1, rho2)?;
    let d = rho1.matrix() - rho2.matrix();
    Ok(d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
}

/// Components of ρ − 1/2 in the basis σ/√2; radius ≤ √2/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub tau: [f64; 3],
}

pub const BLOCH_RADIUS: f64 = std::f64::consts::FRAC_1_SQRT_2;

impl BlochVector {
    pub fn new(tau: [f64; 3]) -> Result<Self> {
        let b = BlochVector { tau };
        if b.radius() > BLOCH_RADIUS + tol::VALIDITY {
            return Err(Error::Domain(format!("Bloch radius {} exceeds √2/2", b.radius())));
        }
        Ok(b)
    }

    pub fn from_state(rho: &DensityMatrix) -> Result<Self> {
        if rho.dim() != 2 {
            return Err(Error::DimMismatch(rho.dim(), 2));
        }
        let m = rho.matrix();
        let s = std::f64::consts::SQRT_2;
        // Tr(ρ σ_i)/√2
        let tx = 2.0 * m[(0, 1)].re / s;
        let ty = -2.0 * m[(0, 1)].im / s;
        let tz = (m[(0, 0)].re - m[(1, 1)].re) / s;
        Ok(BlochVector { tau: [tx, ty, tz] })
    }

    pub fn radius(&self) -> f64 {
        self.tau.iter().map(|t| t * t).sum::<f64>().sqrt()
    }

    pub fn dot(&self, o: &BlochVector) -> f64 {
        self.tau.iter().zip(o.tau.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let [x, y, z] = self.tau;
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.5 + z * s, 0.0),
                C64::new(x * s, -y * s),
                C64::new(x * s, y * s),
                C64::new(0.5 - z * s, 0.0),
            ],
        );
        validate_state(&m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> DensityMatrix {
        DensityMatrix::from_diagonal(d).unwrap()
    }

    #[test]
    fn validation_errors() {
        assert_eq!(diag(&[0.5, 0.5]).eigenvalues(), &[0.5, 0.5]);
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.5, 0.0)]));
        assert!(matches!(validate_state(&m), Err(Error::TraceNotOne(_))));
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(1.2, 0.0), C64::new(-0.2, 0.0)]));
        assert!(matches!(validate_state(&m), Err(Error::NotPsd(_))));
        let mut m = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(matches!(validate_state(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn sqrt_of_diagonal() {
        let s = psd_sqrt(&diag(&[0.25, 0.75]));
        assert!((s[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!((s[(1, 1)].re - 0.75f64.sqrt()).abs() < 1e-14);
        let s = psd_sqrt(&DensityMatrix::maximally_mixed(4));
        assert!((s[(2, 2)].re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn diagonal_fidelities() {
        let a = diag(&[0.75, 0.25]);
        let b = DensityMatrix::maximally_mixed(2);
        let want = (4.0 + 2.0 * 3f64.sqrt()) / 8.0;
        assert!((fidelity(&a, &b).unwrap() - want).abs() < 1e-12);
        assert!((fidelity_n2(&a, &b).unwrap() - (0.5 + 3f64.sqrt() / 4.0)).abs() < 1e-12);
        assert!((fidelity_max_mixed(&a) - want).abs() < 1e-12);
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_pure() {
        let p = PureState::basis(2, 0).projector();
        let q = PureState::basis(2, 1).projector();
        assert!(fidelity(&p, &q).unwrap() < 1e-12);
        assert!(fidelity_n2(&p, &q).unwrap() < 1e-12);
        assert!((bures_distance(&p, &q).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!((bures_angle(&p, &q).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((hs_distance(&p, &q).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn root_fidelity_max_mixed_vs_pure() {
        let rho = DensityMatrix::maximally_mixed(4);
        let p = PureState::basis(4, 2).projector();
        assert!((root_fidelity(&rho, &p).unwrap() - 0.5).abs() < 1e-12);
        assert!((fidelity_max_mixed(&p) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn bloch_roundtrip_basics() {
        let b = BlochVector::from_state(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert!(b.radius() < 1e-15);
        let p = PureState::basis(2, 0).projector();
        assert!((BlochVector::from_state(&p).unwrap().radius() - BLOCH_RADIUS).abs() < 1e-14);
        let b = BlochVector::new([0.1, -0.2, 0.3]).unwrap();
        let back = BlochVector::from_state(&b.to_state().unwrap()).unwrap();
        for i in 0..3 {
            assert!((back.tau[i] - b.tau[i]).abs() < 1e-14);
        }
    }
}
