//! Sampled (F, pdf) curves shared by the analytic, quadrature and Monte Carlo paths.

use serde::{Deserialize, Serialize};

use crate::analytic::Provenance;
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionCurve {
    pub label: String,
    pub f: Vec<f64>,
    pub pdf: Vec<f64>,
    pub pdf_err: Option<Vec<f64>>,
    /// Factor the raw curve was divided by (1 when untouched).
    pub normalization: f64,
    pub provenance: Provenance,
}

impl DistributionCurve {
    pub fn new(label: impl Into<String>, f: Vec<f64>, pdf: Vec<f64>, provenance: Provenance) -> Self {
        DistributionCurve { label: label.into(), f, pdf, pdf_err: None, normalization: 1.0, provenance }
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// Trapezoid mass over the sampled points.
    pub fn trapezoid_mass(&self) -> f64 {
        self.f.windows(2).zip(self.pdf.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
    }

    pub fn max_abs_diff(&self, other: &[f64]) -> f64 {
        self.pdf.iter().zip(other).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// `n` midpoints of a uniform partition of [0, 1].
pub fn midpoint_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

/// A CDF tabulated from a density by Gauss–Legendre integration over
/// uniform cells of [lo, hi], linearly interpolated between cell edges and
/// rescaled so that it ends at exactly 1.
#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    pub lo: f64,
    pub hi: f64,
    pub edges: Vec<f64>,
    /// Raw mass before rescaling.
    pub mass: f64,
}

impl TabulatedCdf {
    pub fn from_pdf<F: FnMut(f64) -> Result<f64>>(mut pdf: F, lo: f64, hi: f64, cells: usize) -> Result<Self> {
        if cells == 0 || !(hi > lo) {
            return Err(Error::Domain(format!("bad CDF table [{lo}, {hi}] with {cells} cells")));
        }
        let (x, w) = gauss_legendre(8);
        let h = (hi - lo) / cells as f64;
        let mut edges = Vec::with_capacity(cells + 1);
        edges.push(0.0);
        let mut acc = 0.0;
        for c in 0..cells {
            let a = lo + c as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                acc += pdf(a + xi * h)? * wi * h;
            }
            edges.push(acc);
        }
        if !(acc > 0.0) || !acc.is_finite() {
            return Err(Error::QuadratureFailure(format!("reference density has mass {acc}")));
        }
        for e in edges.iter_mut() {
            *e /= acc;
        }
        Ok(TabulatedCdf { lo, hi, edges, mass: acc })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return 1.0;
        }
        let cells = self.edges.len() - 1;
        let t = (x - self.lo) / (self.hi - self.lo) * cells as f64;
        let i = (t.floor() as usize).min(cells - 1);
        let frac = t - i as f64;
        self.edges[i] + frac * (self.edges[i + 1] - self.edges[i])
    }
}
