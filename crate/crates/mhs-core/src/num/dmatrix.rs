//! Fourth-order first-derivative matrix on a uniform grid.
//!
//! One canonical derivative operator is used for every radial derivative in
//! the solver: building the per-mode Laplacian, taking boundary traces, and
//! measuring residuals. Sharing the operator makes the discrete identities
//! (div, curl, force balance) hold to rounding instead of truncation error.

use num_complex::Complex64;

use crate::num::dense::RMat;

/// Interior centered 5-point stencil, h = 1.
const CENTER: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
/// Fully one-sided 4th-order stencil at the first node.
const EDGE0: [f64; 5] = [-25.0 / 12.0, 48.0 / 12.0, -36.0 / 12.0, 16.0 / 12.0, -3.0 / 12.0];
/// Skewed 4th-order stencil at the second node.
const EDGE1: [f64; 5] = [-3.0 / 12.0, -10.0 / 12.0, 18.0 / 12.0, -6.0 / 12.0, 1.0 / 12.0];

/// First-derivative operator d/dr on `n` uniformly spaced nodes.
#[derive(Debug, Clone)]
pub struct DiffMatrix {
    pub n: usize,
    pub h: f64,
}

impl DiffMatrix {
    pub fn new(n: usize, h: f64) -> Self {
        assert!(n >= 6, "derivative stencil needs at least 6 nodes");
        assert!(h > 0.0);
        Self { n, h }
    }

    /// Dense representation (used to assemble radial operators for LU).
    pub fn dense(&self) -> RMat {
        let n = self.n;
        let mut d = RMat::zeros(n, n);
        for i in 2..n - 2 {
            for (s, &c) in CENTER.iter().enumerate() {
                *d.at_mut(i, i - 2 + s) = c / self.h;
            }
        }
        for (s, &c) in EDGE0.iter().enumerate() {
            *d.at_mut(0, s) = c / self.h;
        }
        for (s, &c) in EDGE1.iter().enumerate() {
            *d.at_mut(1, s) = c / self.h;
        }
        // mirrored (negated) stencils on the right edge
        for (s, &c) in EDGE1.iter().enumerate() {
            *d.at_mut(n - 2, n - 1 - s) = -c / self.h;
        }
        for (s, &c) in EDGE0.iter().enumerate() {
            *d.at_mut(n - 1, n - 1 - s) = -c / self.h;
        }
        d
    }

    /// Apply to a real vector.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.n);
        let n = self.n;
        let mut out = vec![0.0; n];
        for i in 2..n - 2 {
            let mut s = 0.0;
            for (k, &c) in CENTER.iter().enumerate() {
                s += c * f[i - 2 + k];
            }
            out[i] = s / self.h;
        }
        out[0] = Self::dot(&EDGE0, &f[0..5]) / self.h;
        out[1] = Self::dot(&EDGE1, &f[0..5]) / self.h;
        out[n - 2] = -Self::dot_rev(&EDGE1, &f[n - 5..n]) / self.h;
        out[n - 1] = -Self::dot_rev(&EDGE0, &f[n - 5..n]) / self.h;
        out
    }

    /// Apply to a complex vector.
    pub fn apply_c(&self, f: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(f.len(), self.n);
        let n = self.n;
        let mut out = vec![Complex64::ZERO; n];
        for i in 2..n - 2 {
            let mut s = Complex64::ZERO;
            for (k, &c) in CENTER.iter().enumerate() {
                s += f[i - 2 + k] * c;
            }
            out[i] = s / self.h;
        }
        out[0] = Self::dot_c(&EDGE0, &f[0..5]) / self.h;
        out[1] = Self::dot_c(&EDGE1, &f[0..5]) / self.h;
        out[n - 2] = -Self::dot_c_rev(&EDGE1, &f[n - 5..n]) / self.h;
        out[n - 1] = -Self::dot_c_rev(&EDGE0, &f[n - 5..n]) / self.h;
        out
    }

    /// Derivative at the first node only (boundary trace).
    pub fn trace_first(&self, f: &[Complex64]) -> Complex64 {
        Self::dot_c(&EDGE0, &f[0..5]) / self.h
    }

    /// Derivative at the last node only.
    pub fn trace_last(&self, f: &[Complex64]) -> Complex64 {
        -Self::dot_c_rev(&EDGE0, &f[f.len() - 5..]) / self.h
    }

    fn dot(c: &[f64; 5], f: &[f64]) -> f64 {
        c.iter().zip(f).map(|(a, b)| a * b).sum()
    }

    fn dot_rev(c: &[f64; 5], f: &[f64]) -> f64 {
        c.iter().zip(f.iter().rev()).map(|(a, b)| a * b).sum()
    }

    fn dot_c(c: &[f64; 5], f: &[Complex64]) -> Complex64 {
        c.iter().zip(f).map(|(a, b)| b * *a).sum()
    }

    fn dot_c_rev(c: &[f64; 5], f: &[Complex64]) -> Complex64 {
        c.iter().zip(f.iter().rev()).map(|(a, b)| b * *a).sum()
    }
}
