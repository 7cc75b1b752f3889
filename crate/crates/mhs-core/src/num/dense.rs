//! Minimal dense real/complex matrices with LU solves.
//!
//! Systems here are small (N_r x N_r radial operators, (2K+1)^2 boundary
//! operators), so a plain partial-pivoting LU is all we need.

use num_complex::Complex64;

use crate::error::{MhsError, MhsResult};

/// Dense row-major real matrix.
#[derive(Debug, Clone)]
pub struct RMat {
    pub n_rows: usize,
    pub n_cols: usize,
    pub a: Vec<f64>,
}

impl RMat {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            a: vec![0.0; n_rows * n_cols],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n_cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.a[i * self.n_cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        let mut y = vec![0.0; self.n_rows];
        for i in 0..self.n_rows {
            let row = self.row(i);
            let mut s = 0.0;
            for (aij, xj) in row.iter().zip(x) {
                s += aij * xj;
            }
            y[i] = s;
        }
        y
    }

    pub fn matvec_c(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n_cols);
        let mut y = vec![Complex64::ZERO; self.n_rows];
        for i in 0..self.n_rows {
            let row = self.row(i);
            let mut s = Complex64::ZERO;
            for (aij, xj) in row.iter().zip(x) {
                s += xj * *aij;
            }
            y[i] = s;
        }
        y
    }

    /// C = self * other
    pub fn matmul(&self, other: &RMat) -> RMat {
        assert_eq!(self.n_cols, other.n_rows);
        let mut c = RMat::zeros(self.n_rows, other.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let aik = self.at(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.n_cols {
                    *c.at_mut(i, j) += aik * other.at(k, j);
                }
            }
        }
        c
    }

    pub fn to_complex(&self) -> CMat {
        CMat {
            n: {
                assert_eq!(self.n_rows, self.n_cols);
                self.n_rows
            },
            a: self.a.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

/// Dense row-major square complex matrix.
#[derive(Debug, Clone)]
pub struct CMat {
    pub n: usize,
    pub a: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            a: vec![Complex64::ZERO; n * n],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.a[i * self.n + j]
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![Complex64::ZERO; self.n];
        for i in 0..self.n {
            let row = &self.a[i * self.n..(i + 1) * self.n];
            let mut s = Complex64::ZERO;
            for (aij, xj) in row.iter().zip(x) {
                s += aij * xj;
            }
            y[i] = s;
        }
        y
    }

    /// Max-row-sum norm.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.a[i * self.n..(i + 1) * self.n]
                    .iter()
                    .map(|z| z.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Largest entry modulus.
    pub fn norm_max(&self) -> f64 {
        self.a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn lu(&self) -> MhsResult<Lu> {
        Lu::factor(self)
    }
}

/// LU factorization with partial pivoting of a square complex matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<Complex64>,
    piv: Vec<usize>,
    /// |pivot|_max / |pivot|_min, a cheap conditioning proxy.
    pub pivot_ratio: f64,
}

impl Lu {
    pub fn factor(m: &CMat) -> MhsResult<Lu> {
        let n = m.n;
        let mut lu = m.a.clone();
        let mut piv = vec![0usize; n];
        let mut pmin = f64::INFINITY;
        let mut pmax: f64 = 0.0;
        for col in 0..n {
            // pivot search
            let mut best = col;
            let mut best_mag = lu[col * n + col].norm();
            for r in (col + 1)..n {
                let mag = lu[r * n + col].norm();
                if mag > best_mag {
                    best = r;
                    best_mag = mag;
                }
            }
            if best_mag == 0.0 {
                return Err(MhsError::Linear(format!(
                    "singular matrix at elimination column {col}"
                )));
            }
            pmin = pmin.min(best_mag);
            pmax = pmax.max(best_mag);
            piv[col] = best;
            if best != col {
                for j in 0..n {
                    lu.swap(col * n + j, best * n + j);
                }
            }
            let inv_p = lu[col * n + col].inv();
            for r in (col + 1)..n {
                let factor = lu[r * n + col] * inv_p;
                lu[r * n + col] = factor;
                if factor != Complex64::ZERO {
                    for j in (col + 1)..n {
                        let u = lu[col * n + j];
                        lu[r * n + j] -= factor * u;
                    }
                }
            }
        }
        Ok(Lu {
            n,
            lu,
            piv,
            pivot_ratio: pmax / pmin,
        })
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x = b.to_vec();
        // apply the full row permutation before substituting: the stored L
        // entries are the post-pivoting ones
        for i in 0..n {
            x.swap(i, self.piv[i]);
        }
        for i in 0..n {
            let xi = x[i];
            if xi != Complex64::ZERO {
                for r in (i + 1)..n {
                    let l = self.lu[r * n + i];
                    x[r] -= l * xi;
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    pub fn solve_real(&self, b: &[f64]) -> Vec<f64> {
        let bc: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.solve(&bc).iter().map(|z| z.re).collect()
    }
}
