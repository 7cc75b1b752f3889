//! Boundary Fourier data, point-evaluable magnetic fields, and the nodal
//! annulus field assembled from a stream function.
//!
//! Sign conventions used throughout the 2D solver:
//!   * outward normal of the annulus is -e_r on the inner circle, +e_r on the
//!     outer, so the normal trace at r=1 is f = -B_r;
//!   * the tangential trace on the inner circle is the component along the
//!     counterclockwise tangent, B_tau = +B_phi;
//!   * boundary operators are reported internally in the "+d/drho at rho=1"
//!     convention (inner-pointing radial derivative); the public Neumann
//!     trace flips the sign once, and only once, to the outward normal.

use num_complex::Complex64;

use crate::error::{MhsError, MhsResult};
use crate::geometry::TensorGrid2D;
use crate::num::dense::RMat;
use crate::num::dmatrix::DiffMatrix;
use crate::num::fft;
use crate::num::spline::CSpline;

/// Truncated Fourier series on a boundary circle, coefficients for modes
/// -K..=K stored densely (index K+k).
#[derive(Debug, Clone)]
pub struct BoundaryFourier {
    pub k_cut: usize,
    coeffs: Vec<Complex64>,
}

impl BoundaryFourier {
    pub fn zeros(k_cut: usize) -> Self {
        Self {
            k_cut,
            coeffs: vec![Complex64::ZERO; 2 * k_cut + 1],
        }
    }

    pub fn from_modes(k_cut: usize, modes: &[(i64, Complex64)]) -> Self {
        let mut out = Self::zeros(k_cut);
        for &(k, c) in modes {
            out.set(k, c);
        }
        out
    }

    /// Project real nodal samples on a uniform circle grid onto modes |k| <= K.
    pub fn from_samples(samples: &[f64], k_cut: usize) -> Self {
        let hat = fft::fft_forward(samples);
        let n = samples.len();
        let mut out = Self::zeros(k_cut);
        for k in -(k_cut as i64)..=(k_cut as i64) {
            out.set(k, hat[fft::wavenumber_bin(k, n)]);
        }
        out
    }

    pub fn get(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.k_cut {
            Complex64::ZERO
        } else {
            self.coeffs[(self.k_cut as i64 + k) as usize]
        }
    }

    pub fn set(&mut self, k: i64, c: Complex64) {
        assert!(k.unsigned_abs() as usize <= self.k_cut, "mode out of range");
        self.coeffs[(self.k_cut as i64 + k) as usize] = c;
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let k_cut = self.k_cut as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i as i64 - k_cut, c))
    }

    pub fn eval_complex(&self, theta: f64) -> Complex64 {
        self.modes()
            .map(|(k, c)| c * Complex64::from_polar(1.0, k as f64 * theta))
            .sum()
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.eval_complex(theta).re
    }

    pub fn mean(&self) -> Complex64 {
        self.get(0)
    }

    pub fn norm_inf_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn as_vector(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Largest violation of the real-data symmetry c_{-k} = conj(c_k).
    pub fn reality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..=(self.k_cut as i64) {
            worst = worst.max((self.get(-k) - self.get(k).conj()).norm());
        }
        worst
    }
}

/// Point-evaluable magnetic field with its spatial gradient, the interface
/// consumed by characteristic tracing.
pub trait FieldEval: Sync {
    /// Cartesian components at a Cartesian point.
    fn eval(&self, p: [f64; 2]) -> [f64; 2];
    /// Cartesian gradient dB_i/dx_j.
    fn grad(&self, p: [f64; 2]) -> [[f64; 2]; 2];
}

/// B0 = x/|x|^2: the current-free reference field, B0·n = -1 at r=1.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceField;

impl FieldEval for ReferenceField {
    fn eval(&self, p: [f64; 2]) -> [f64; 2] {
        let r2 = p[0] * p[0] + p[1] * p[1];
        [p[0] / r2, p[1] / r2]
    }

    fn grad(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        let r2 = p[0] * p[0] + p[1] * p[1];
        let mut g = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let kron = if i == j { 1.0 } else { 0.0 };
                g[i][j] = kron / r2 - 2.0 * p[i] * p[j] / (r2 * r2);
            }
        }
        g
    }
}

/// (e_r + beta e_theta)/r: admissible non-radial test field whose
/// characteristics are logarithmic spirals theta(r) = theta* + beta ln r.
#[derive(Debug, Clone, Copy)]
pub struct SpiralField {
    pub beta: f64,
}

impl FieldEval for SpiralField {
    fn eval(&self, p: [f64; 2]) -> [f64; 2] {
        let r2 = p[0] * p[0] + p[1] * p[1];
        [
            (p[0] - self.beta * p[1]) / r2,
            (p[1] + self.beta * p[0]) / r2,
        ]
    }

    fn grad(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        // B = M x / |x|^2 with M = [[1,-b],[b,1]]
        let b = self.beta;
        let m = [[1.0, -b], [b, 1.0]];
        let r2 = p[0] * p[0] + p[1] * p[1];
        let mx = [m[0][0] * p[0] + m[0][1] * p[1], m[1][0] * p[0] + m[1][1] * p[1]];
        let mut g = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                g[i][j] = m[i][j] / r2 - 2.0 * mx[i] * p[j] / (r2 * r2);
            }
        }
        g
    }
}

struct ModeSpline {
    k: i64,
    u: CSpline,
    du: CSpline,
}

/// Divergence-free nodal field on the annulus in stream-function form:
///   B_r   = 2 lambda / r - (1/r) sum_k ik u_k(r) e^{ik phi}
///   B_phi = J / (r ln L)  + sum_k u_k'(r) e^{ik phi}
/// (lambda: monopole gauge strength, J: harmonic gauge strength). Radial
/// profiles are interpolated by clamped cubic splines for off-grid
/// evaluation.
pub struct Field2D {
    pub grid: TensorGrid2D,
    pub lambda: f64,
    pub j_gauge: f64,
    pub b_r: RMat,
    pub b_phi: RMat,
    modes: Vec<ModeSpline>,
    uhat: Vec<Vec<Complex64>>,
}

impl Field2D {
    /// Assemble from per-mode stream-function profiles (index K+k, k in
    /// -K..=K), each of length N_r. Empty profile vectors are allowed and
    /// treated as zero.
    pub fn from_stream(
        grid: &TensorGrid2D,
        lambda: f64,
        j_gauge: f64,
        uhat: &[Vec<Complex64>],
    ) -> MhsResult<Self> {
        let k_cut = grid.k_cut as i64;
        if uhat.len() != 2 * grid.k_cut + 1 {
            return Err(MhsError::Config(format!(
                "expected {} mode profiles, got {}",
                2 * grid.k_cut + 1,
                uhat.len()
            )));
        }
        let n_r = grid.n_r;
        let n_phi = grid.n_phi;
        let d = DiffMatrix::new(n_r, grid.h);
        let mut b_r = RMat::zeros(n_r, n_phi);
        let mut b_phi = RMat::zeros(n_r, n_phi);
        for i in 0..n_r {
            for j in 0..n_phi {
                *b_r.at_mut(i, j) = 2.0 * lambda / grid.r[i];
                *b_phi.at_mut(i, j) = j_gauge / (grid.r[i] * grid.outer_radius.ln());
            }
        }
        let mut modes = Vec::new();
        for (idx, u) in uhat.iter().enumerate() {
            let k = idx as i64 - k_cut;
            if u.is_empty() || u.iter().all(|c| c.norm() == 0.0) {
                continue;
            }
            if u.len() != n_r {
                return Err(MhsError::Config(format!(
                    "mode {k} profile has length {}, expected {n_r}",
                    u.len()
                )));
            }
            let du = d.apply_c(u);
            let d2u = d.apply_c(&du);
            let ik = Complex64::new(0.0, k as f64);
            for i in 0..n_r {
                for j in 0..n_phi {
                    let e = Complex64::from_polar(1.0, k as f64 * grid.phi[j]);
                    *b_r.at_mut(i, j) += (-ik * u[i] / grid.r[i] * e).re;
                    *b_phi.at_mut(i, j) += (du[i] * e).re;
                }
            }
            modes.push(ModeSpline {
                k,
                u: CSpline::clamped(1.0, grid.h, u, du[0], du[n_r - 1]),
                du: CSpline::clamped(1.0, grid.h, &du, d2u[0], d2u[n_r - 1]),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            lambda,
            j_gauge,
            b_r,
            b_phi,
            modes,
            uhat: uhat.to_vec(),
        })
    }

    /// The per-mode stream-function profiles this field was assembled from
    /// (index K+k; profiles may be empty, meaning zero).
    pub fn stream_profiles(&self) -> &[Vec<Complex64>] {
        &self.uhat
    }

    /// The reference field B0 = x/|x|^2 on this grid (lambda = 1/2).
    pub fn reference(grid: &TensorGrid2D) -> Self {
        let uhat = vec![Vec::new(); 2 * grid.k_cut + 1];
        Self::from_stream(grid, 0.5, 0.0, &uhat).expect("zero stream profiles are valid")
    }

    fn clamp_r(&self, r: f64) -> f64 {
        r.clamp(1.0, self.grid.outer_radius)
    }

    /// Polar components (B_r, B_phi) at polar (r, theta).
    pub fn eval_polar(&self, r: f64, theta: f64) -> (f64, f64) {
        let rc = self.clamp_r(r);
        let mut br = 2.0 * self.lambda / r;
        let mut bp = self.j_gauge / (r * self.grid.outer_radius.ln());
        for m in &self.modes {
            let e = Complex64::from_polar(1.0, m.k as f64 * theta);
            let ik = Complex64::new(0.0, m.k as f64);
            br += (-ik * m.u.eval(rc) / r * e).re;
            bp += (m.du.eval(rc) * e).re;
        }
        (br, bp)
    }

    /// Max nodal difference over both components against another field on the
    /// same grid.
    pub fn max_nodal_diff(&self, other: &Field2D) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.grid.n_r {
            for j in 0..self.grid.n_phi {
                worst = worst.max((self.b_r.at(i, j) - other.b_r.at(i, j)).abs());
                worst = worst.max((self.b_phi.at(i, j) - other.b_phi.at(i, j)).abs());
            }
        }
        worst
    }

    pub fn norm_inf(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.grid.n_r {
            for j in 0..self.grid.n_phi {
                let v = (self.b_r.at(i, j).powi(2) + self.b_phi.at(i, j).powi(2)).sqrt();
                worst = worst.max(v);
            }
        }
        worst
    }

    /// Normal trace B·n (outward) on a boundary row as nodal values.
    pub fn normal_trace(&self, boundary: crate::geometry::BoundaryId) -> Vec<f64> {
        match boundary {
            crate::geometry::BoundaryId::Inner => {
                (0..self.grid.n_phi).map(|j| -self.b_r.at(0, j)).collect()
            }
            crate::geometry::BoundaryId::Outer => (0..self.grid.n_phi)
                .map(|j| self.b_r.at(self.grid.n_r - 1, j))
                .collect(),
        }
    }

    /// Tangential trace on the inner boundary (counterclockwise tangent).
    pub fn tangential_trace_inner(&self) -> Vec<f64> {
        (0..self.grid.n_phi).map(|j| self.b_phi.at(0, j)).collect()
    }
}

impl FieldEval for Field2D {
    fn eval(&self, p: [f64; 2]) -> [f64; 2] {
        let (r, theta) = crate::geometry::to_polar(p);
        let (br, bp) = self.eval_polar(r, theta);
        let (c, s) = (theta.cos(), theta.sin());
        [br * c - bp * s, br * s + bp * c]
    }

    fn grad(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        let (r, theta) = crate::geometry::to_polar(p);
        let rc = self.clamp_r(r);
        let lnl = self.grid.outer_radius.ln();
        // polar components and their (r, theta) partials
        let mut br = 2.0 * self.lambda / r;
        let mut bp = self.j_gauge / (r * lnl);
        let mut br_r = -2.0 * self.lambda / (r * r);
        let mut bp_r = -self.j_gauge / (r * r * lnl);
        let mut br_t = 0.0;
        let mut bp_t = 0.0;
        for m in &self.modes {
            let e = Complex64::from_polar(1.0, m.k as f64 * theta);
            let ik = Complex64::new(0.0, m.k as f64);
            let u = m.u.eval(rc);
            let du = m.du.eval(rc);
            let d2u = m.du.eval_deriv(rc);
            br += (-ik * u / r * e).re;
            bp += (du * e).re;
            br_r += (-ik * (du / r - u / (r * r)) * e).re;
            bp_r += (d2u * e).re;
            br_t += (-ik * ik * u / r * e).re;
            bp_t += (ik * du * e).re;
        }
        let (c, s) = (theta.cos(), theta.sin());
        // Cartesian components' (r, theta) partials
        let bx_r = br_r * c - bp_r * s;
        let by_r = br_r * s + bp_r * c;
        let bx_t = br_t * c - br * s - bp_t * s - bp * c;
        let by_t = br_t * s + br * c + bp_t * c - bp * s;
        // chain rule: d/dx = c d/dr - (s/r) d/dtheta, d/dy = s d/dr + (c/r) d/dtheta
        [
            [bx_r * c - bx_t * s / r, bx_r * s + bx_t * c / r],
            [by_r * c - by_t * s / r, by_r * s + by_t * c / r],
        ]
    }
}
