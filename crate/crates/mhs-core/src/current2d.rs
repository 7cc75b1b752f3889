//! The boundary operator A[B] on the truncated Fourier basis, its closed-form
//! multipliers for the reference field, the current integral equation, and
//! the pressure constant J.
//!
//! Internal convention: operator entries are "+d/drho at rho=1" traces (the
//! inner-pointing radial derivative), matching the closed-form multipliers.
//! This is the negative of the outward-normal Neumann trace reported by
//! `elliptic2d::neumann_trace_inner`; the flip is applied exactly once, here.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::elliptic2d::ModeSolver;
use crate::error::{MhsError, MhsResult};
use crate::field::{BoundaryFourier, FieldEval};
use crate::geometry::TensorGrid2D;
use crate::num::fft;
use crate::transport2d::{footpoints, FootpointMap};

/// Dense matrix of A[B] on modes -K..=K (row = output mode, col = input
/// mode, index K + k), with a fingerprint of the footpoint data it was
/// assembled from.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub k_cut: usize,
    pub mat: crate::num::dense::CMat,
    pub fingerprint: u64,
}

impl OperatorMatrix {
    pub fn entry(&self, out_mode: i64, in_mode: i64) -> Complex64 {
        let k = self.k_cut as i64;
        self.mat.at((k + out_mode) as usize, (k + in_mode) as usize)
    }

    /// Row-major CSV dump, one "re,im" pair per entry.
    pub fn to_csv(&self) -> String {
        let n = 2 * self.k_cut + 1;
        let mut out = String::new();
        for i in 0..n {
            let row: Vec<String> = (0..n)
                .map(|j| {
                    let z = self.mat.at(i, j);
                    format!("{:.16e},{:.16e}", z.re, z.im)
                })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Relative off-diagonal mass (Frobenius).
    pub fn offdiag_ratio(&self) -> f64 {
        let n = 2 * self.k_cut + 1;
        let mut diag = 0.0;
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                let m = self.mat.at(i, j).norm_sqr();
                if i == j {
                    diag += m;
                } else {
                    off += m;
                }
            }
        }
        (off / diag).sqrt()
    }
}

fn fingerprint_footpoints(fp: &FootpointMap) -> u64 {
    // FNV-1a over the footpoint angles; guards against stale-operator reuse
    let mut h: u64 = 0xcbf29ce484222325;
    for v in &fp.theta_star.a {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}

/// Assemble A from a precomputed footpoint map (shared across columns).
pub fn assemble_from_footpoints(
    fp: &FootpointMap,
    k_cut: usize,
    solver: &ModeSolver,
) -> MhsResult<OperatorMatrix> {
    let grid = &fp.grid;
    let n = 2 * k_cut + 1;
    let kc = k_cut as i64;
    let columns: Vec<MhsResult<Vec<Complex64>>> = (-kc..=kc)
        .into_par_iter()
        .map(|k| {
            // transported basis current e^{ik theta*}
            let mut modes = vec![vec![Complex64::ZERO; grid.n_r]; n];
            for i in 0..grid.n_r {
                let ring: Vec<Complex64> = (0..grid.n_phi)
                    .map(|j| Complex64::from_polar(1.0, k as f64 * fp.theta_star.at(i, j)))
                    .collect();
                let hat = fft::fft_forward_c(&ring);
                for m in -kc..=kc {
                    modes[(kc + m) as usize][i] = hat[fft::wavenumber_bin(m, grid.n_phi)];
                }
            }
            let mut col = vec![Complex64::ZERO; n];
            for m in -kc..=kc {
                let prof = &modes[(kc + m) as usize];
                let u = solver.solve_mode(m, prof, (Complex64::ZERO, Complex64::ZERO))?;
                col[(kc + m) as usize] = solver.d.trace_first(&u.values);
            }
            Ok(col)
        })
        .collect();
    let mut mat = crate::num::dense::CMat::zeros(n);
    for (ci, col) in columns.into_iter().enumerate() {
        for (ri, v) in col?.into_iter().enumerate() {
            *mat.at_mut(ri, ci) = v;
        }
    }
    Ok(OperatorMatrix {
        k_cut,
        mat,
        fingerprint: fingerprint_footpoints(fp),
    })
}

/// Assemble A[B], tracing footpoints once.
pub fn assemble_a(
    field: &dyn FieldEval,
    k_cut: usize,
    grid: &TensorGrid2D,
    solver: &ModeSolver,
) -> MhsResult<OperatorMatrix> {
    let fp = footpoints(field, grid)?;
    assemble_from_footpoints(&fp, k_cut, solver)
}

/// Closed-form diagonal multiplier of A[B0] on mode k for outer radius L, in
/// the "+d/drho at rho=1" convention (separate resonant branches at k=0 and
/// |k|=2).
pub fn closed_form_multiplier(k: i64, l: f64) -> f64 {
    let a = l;
    let k = k.unsigned_abs() as i64;
    if k == 0 {
        return (1.0 - a * a + 2.0 * a.ln()) / (4.0 * a.ln());
    }
    if k == 2 {
        let d = a.powi(-2) - a.powi(2);
        return (4.0 * a * a * a.ln() + d) / (4.0 * d);
    }
    let kf = k as f64;
    ((kf - 2.0) * a.powf(-kf) + (kf + 2.0) * a.powf(kf) - 2.0 * kf * a * a)
        / ((4.0 - kf * kf) * (a.powf(kf) - a.powf(-kf)))
}

/// The "+d/drho" trace of the harmonic gauge potential phi = ln r / ln L on
/// the inner circle: the constant 1/ln L.
pub fn harmonic_gauge_trace(k_cut: usize, l: f64) -> BoundaryFourier {
    BoundaryFourier::from_modes(k_cut, &[(0, Complex64::new(1.0 / l.ln(), 0.0))])
}

#[derive(Debug, Clone, Copy)]
pub enum JMode {
    FixedJ(f64),
    PressureJ,
}

#[derive(Debug, Clone)]
pub struct CurrentEquationSolution {
    pub j0: BoundaryFourier,
    pub j_gauge: f64,
    pub lambda: f64,
    /// residual of the assembled tangential equation in coefficient space
    pub residual: f64,
    /// pivot-ratio conditioning proxy of the LU factorization of A
    pub cond_proxy: f64,
}

/// Pressure constant of the loop-defect condition: the J for which the
/// circulation of j0 against f around the inflow circle vanishes.
pub fn compute_j(
    f_in: &BoundaryFourier,
    a_inv_g0: &[Complex64],
    a_inv_phi: &[Complex64],
    k_cut: usize,
) -> MhsResult<f64> {
    let kc = k_cut as i64;
    let mut num = Complex64::ZERO;
    let mut den = Complex64::ZERO;
    for k in -kc..=kc {
        let fc = f_in.get(k).conj();
        num += a_inv_g0[(kc + k) as usize] * fc;
        den += a_inv_phi[(kc + k) as usize] * fc;
    }
    let scale = f_in.norm_inf_coeff();
    if den.norm() < 1e-10 * scale.max(1e-30) {
        return Err(MhsError::Degeneracy(format!(
            "pressure nondegeneracy integral {:.3e} below threshold for data of size {:.3e}",
            den.norm(),
            scale
        )));
    }
    Ok((num / den).re)
}

/// Solve the tangential boundary equation
///   lambda*(B_mono)_tau + d_rho v + J d_rho phi + A j0 = g
/// for j0 (all traces in the "+d/drho" convention; (B_mono)_tau = 0 on the
/// exact circle). In PressureJ mode J is set by the loop-defect condition.
pub fn solve_current_equation(
    a: &OperatorMatrix,
    g: &BoundaryFourier,
    f_in: &BoundaryFourier,
    lambda: f64,
    v_trace: &BoundaryFourier,
    phi_trace: &BoundaryFourier,
    mode: JMode,
) -> MhsResult<CurrentEquationSolution> {
    let kc = a.k_cut as i64;
    let n = 2 * a.k_cut + 1;
    let lu = a.mat.lu()?;
    if lu.pivot_ratio > 1e12 {
        return Err(MhsError::Linear(format!(
            "operator matrix is ill-conditioned (pivot ratio {:.3e})",
            lu.pivot_ratio
        )));
    }
    let mut g0 = vec![Complex64::ZERO; n];
    let mut phi_vec = vec![Complex64::ZERO; n];
    for k in -kc..=kc {
        g0[(kc + k) as usize] = g.get(k) - v_trace.get(k);
        phi_vec[(kc + k) as usize] = phi_trace.get(k);
    }
    let x1 = lu.solve(&g0);
    let x2 = lu.solve(&phi_vec);
    let j_gauge = match mode {
        JMode::FixedJ(j) => j,
        JMode::PressureJ => compute_j(f_in, &x1, &x2, a.k_cut)?,
    };
    let mut j0 = BoundaryFourier::zeros(a.k_cut);
    let mut coeffs = vec![Complex64::ZERO; n];
    for k in -kc..=kc {
        let idx = (kc + k) as usize;
        coeffs[idx] = x1[idx] - x2[idx] * j_gauge;
        j0.set(k, coeffs[idx]);
    }
    // residual of A j0 - (g0 - J phi)
    let back = a.mat.matvec(&coeffs);
    let mut residual = 0.0f64;
    for idx in 0..n {
        residual = residual.max((back[idx] - (g0[idx] - phi_vec[idx] * j_gauge)).norm());
    }
    Ok(CurrentEquationSolution {
        j0,
        j_gauge,
        lambda,
        residual,
        cond_proxy: lu.pivot_ratio,
    })
}
