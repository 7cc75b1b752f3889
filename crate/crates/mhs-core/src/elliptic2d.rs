//! Laplace/Poisson solves on the annulus (per Fourier mode) and on mapped
//! near-annular domains (divergence-form operator with a per-mode annulus
//! preconditioner).
//!
//! The per-mode radial operator is the composition
//!   A_k = diag(1/r) · D · diag(r) · D − diag(k²/r²)
//! with the canonical 4th-order derivative D and Dirichlet rows at both
//! endpoints. Using the same D everywhere makes the discrete div/curl/force
//! identities of the assembled field cancel to rounding on interior rows.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{MhsError, MhsResult};
use crate::field::BoundaryFourier;
use crate::geometry::{DiffeoMap, TensorGrid2D};
use crate::num::dense::{CMat, Lu, RMat};
use crate::num::dmatrix::DiffMatrix;
use crate::num::fft;
use crate::transport2d::CurrentScalar2D;

/// Radial profile of one angular mode.
#[derive(Debug, Clone)]
pub struct ModeProfile {
    pub k: i64,
    pub values: Vec<Complex64>,
}

/// Factorized per-mode radial operators for a fixed (L, N_r), |k| <= k_max.
pub struct ModeSolver {
    pub outer_radius: f64,
    pub n_r: usize,
    pub h: f64,
    pub r: Vec<f64>,
    pub d: DiffMatrix,
    pub k_max: usize,
    base: RMat,
    lus: Vec<Lu>,
}

impl ModeSolver {
    pub fn new(outer_radius: f64, n_r: usize, k_max: usize) -> MhsResult<Self> {
        if n_r < 16 {
            return Err(MhsError::Config(format!(
                "N_r = {n_r} too small for the radial BVP solver"
            )));
        }
        let h = (outer_radius - 1.0) / (n_r - 1) as f64;
        let r: Vec<f64> = (0..n_r)
            .map(|i| {
                if i == n_r - 1 {
                    outer_radius
                } else {
                    1.0 + i as f64 * h
                }
            })
            .collect();
        let d = DiffMatrix::new(n_r, h);
        let dd = d.dense();
        // diag(r) · D
        let mut rd = dd.clone();
        for i in 0..n_r {
            for j in 0..n_r {
                *rd.at_mut(i, j) *= r[i];
            }
        }
        // diag(1/r) · D · diag(r) · D
        let mut base = dd.matmul(&rd);
        for i in 0..n_r {
            for j in 0..n_r {
                *base.at_mut(i, j) /= r[i];
            }
        }
        let lus: Vec<MhsResult<Lu>> = (0..=k_max)
            .into_par_iter()
            .map(|k| {
                let mut a = CMat::zeros(n_r);
                for i in 0..n_r {
                    for j in 0..n_r {
                        *a.at_mut(i, j) = Complex64::new(base.at(i, j), 0.0);
                    }
                    *a.at_mut(i, i) -= (k * k) as f64 / (r[i] * r[i]);
                }
                for j in 0..n_r {
                    *a.at_mut(0, j) = Complex64::ZERO;
                    *a.at_mut(n_r - 1, j) = Complex64::ZERO;
                }
                *a.at_mut(0, 0) = Complex64::ONE;
                *a.at_mut(n_r - 1, n_r - 1) = Complex64::ONE;
                a.lu()
            })
            .collect();
        let lus = lus.into_iter().collect::<MhsResult<Vec<_>>>()?;
        Ok(Self {
            outer_radius,
            n_r,
            h,
            r,
            d,
            k_max,
            base,
            lus,
        })
    }

    /// One factorized solver sized to cover every FFT bin of the grid.
    pub fn for_grid(grid: &TensorGrid2D) -> MhsResult<Self> {
        Self::new(grid.outer_radius, grid.n_r, grid.n_phi / 2)
    }

    /// Solve the mode-k two-point BVP with Dirichlet data (at r=1, at r=L).
    pub fn solve_mode(
        &self,
        k: i64,
        source: &[Complex64],
        bc: (Complex64, Complex64),
    ) -> MhsResult<ModeProfile> {
        let ka = k.unsigned_abs() as usize;
        if ka > self.k_max {
            return Err(MhsError::Config(format!(
                "mode {k} exceeds the factorized range |k| <= {}",
                self.k_max
            )));
        }
        let mut rhs = source.to_vec();
        assert_eq!(rhs.len(), self.n_r);
        rhs[0] = bc.0;
        rhs[self.n_r - 1] = bc.1;
        Ok(ModeProfile {
            k,
            values: self.lus[ka].solve(&rhs),
        })
    }

    /// Interior residual of the mode-k equation for a solved profile.
    pub fn mode_residual(&self, k: i64, u: &[Complex64], source: &[Complex64]) -> f64 {
        let mut ru: Vec<Complex64> = u.iter().zip(&self.r).map(|(v, &r)| v * r).collect();
        ru = self.d.apply_c(&ru);
        let lap = self.d.apply_c(&ru);
        let mut worst = 0.0f64;
        for i in 2..self.n_r - 2 {
            let val = lap[i] / self.r[i] - u[i] * ((k * k) as f64 / (self.r[i] * self.r[i]))
                - source[i];
            worst = worst.max(val.norm());
        }
        worst
    }

    /// The underlying k=0 radial operator without Dirichlet rows (used by
    /// diagnostics and oracles).
    pub fn base_operator(&self) -> &RMat {
        &self.base
    }
}

/// Nodal scalar field together with its angular-mode representation.
#[derive(Debug, Clone)]
pub struct ScalarField2D {
    pub grid: TensorGrid2D,
    pub values: RMat,
    /// profiles for k = -k_cut..=k_cut (index k_cut + k)
    pub modes: Vec<Vec<Complex64>>,
}

impl ScalarField2D {
    pub fn zeros(grid: &TensorGrid2D) -> Self {
        Self {
            grid: grid.clone(),
            values: RMat::zeros(grid.n_r, grid.n_phi),
            modes: vec![vec![Complex64::ZERO; grid.n_r]; 2 * grid.k_cut + 1],
        }
    }

    /// Build from mode profiles (k = -K..=K), synthesizing nodal values.
    pub fn from_modes(grid: &TensorGrid2D, modes: Vec<Vec<Complex64>>) -> Self {
        assert_eq!(modes.len(), 2 * grid.k_cut + 1);
        let mut values = RMat::zeros(grid.n_r, grid.n_phi);
        for i in 0..grid.n_r {
            let mut ring = vec![Complex64::ZERO; grid.n_phi];
            for (idx, prof) in modes.iter().enumerate() {
                let k = idx as i64 - grid.k_cut as i64;
                ring[fft::wavenumber_bin(k, grid.n_phi)] += prof[i];
            }
            let row = fft::fft_inverse_real(&ring);
            for (j, v) in row.into_iter().enumerate() {
                *values.at_mut(i, j) = v;
            }
        }
        Self {
            grid: grid.clone(),
            values,
            modes,
        }
    }

    /// Build from nodal values, extracting modes |k| <= k_cut.
    pub fn from_values(grid: &TensorGrid2D, values: RMat) -> Self {
        let mut modes = vec![vec![Complex64::ZERO; grid.n_r]; 2 * grid.k_cut + 1];
        for i in 0..grid.n_r {
            let hat = fft::fft_forward(values.row(i));
            for k in -(grid.k_cut as i64)..=(grid.k_cut as i64) {
                modes[(grid.k_cut as i64 + k) as usize][i] =
                    hat[fft::wavenumber_bin(k, grid.n_phi)];
            }
        }
        Self {
            grid: grid.clone(),
            values,
            modes,
        }
    }

    pub fn mode(&self, k: i64) -> &[Complex64] {
        &self.modes[(self.grid.k_cut as i64 + k) as usize]
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Poisson solve Δu = j with Dirichlet data per boundary, mode by mode.
pub fn solve_poisson(
    source: &CurrentScalar2D,
    dirichlet: (&BoundaryFourier, &BoundaryFourier),
    grid: &TensorGrid2D,
    solver: &ModeSolver,
) -> MhsResult<ScalarField2D> {
    // angular transform of the source, per radius
    let k_cut = grid.k_cut as i64;
    let mut src_modes = vec![vec![Complex64::ZERO; grid.n_r]; 2 * grid.k_cut + 1];
    for i in 0..grid.n_r {
        let hat = fft::fft_forward(source.values.row(i));
        for k in -k_cut..=k_cut {
            src_modes[(k_cut + k) as usize][i] = hat[fft::wavenumber_bin(k, grid.n_phi)];
        }
    }
    let profiles: Vec<MhsResult<Vec<Complex64>>> = (-k_cut..=k_cut)
        .into_par_iter()
        .map(|k| {
            let prof = &src_modes[(k_cut + k) as usize];
            let bc = (dirichlet.0.get(k), dirichlet.1.get(k));
            Ok(solver.solve_mode(k, prof, bc)?.values)
        })
        .collect();
    let modes = profiles.into_iter().collect::<MhsResult<Vec<_>>>()?;
    Ok(ScalarField2D::from_modes(grid, modes))
}

/// Harmonic extension of boundary Dirichlet data (zero-source Poisson solve).
pub fn harmonic_extension(
    h_minus: &BoundaryFourier,
    h_plus: &BoundaryFourier,
    grid: &TensorGrid2D,
    solver: &ModeSolver,
) -> MhsResult<ScalarField2D> {
    let zero = CurrentScalar2D::zeros(grid);
    solve_poisson(&zero, (h_minus, h_plus), grid, solver)
}

/// Neumann trace on the inner boundary in the direction of the outward
/// normal of the domain there, i.e. -d/dr at r=1, per mode.
pub fn neumann_trace_inner(u: &ScalarField2D, solver: &ModeSolver) -> BoundaryFourier {
    let mut out = BoundaryFourier::zeros(u.grid.k_cut);
    for (idx, prof) in u.modes.iter().enumerate() {
        let k = idx as i64 - u.grid.k_cut as i64;
        out.set(k, -solver.d.trace_first(prof));
    }
    out
}

/// Metric coefficient tables of a radial-bump map sampled at grid nodes, in
/// the flux form of the mapped Laplacian:
///   L v = (1/√G) [ D_r(√G G^{rr} v_r + √G G^{rθ} v_θ) + ∂_θ(√G G^{rθ} v_r + √G G^{θθ} v_θ) ].
pub struct MappedOperator {
    pub grid: TensorGrid2D,
    pub sqrt_g: RMat,
    pub a_rr: RMat,
    pub a_rt: RMat,
    pub a_tt: RMat,
    /// boundary tables for trace computations
    pub radius_r1: Vec<f64>,
    pub radius_dr_r1: Vec<f64>,
    pub radius_dt_r1: Vec<f64>,
}

impl MappedOperator {
    pub fn new(map: &DiffeoMap, grid: &TensorGrid2D) -> MhsResult<Self> {
        if (map.outer_radius - grid.outer_radius).abs() > 1e-14 {
            return Err(MhsError::Config(
                "map and grid outer radii disagree".into(),
            ));
        }
        let (n_r, n_phi) = (grid.n_r, grid.n_phi);
        let mut sqrt_g = RMat::zeros(n_r, n_phi);
        let mut a_rr = RMat::zeros(n_r, n_phi);
        let mut a_rt = RMat::zeros(n_r, n_phi);
        let mut a_tt = RMat::zeros(n_r, n_phi);
        for i in 0..n_r {
            for j in 0..n_phi {
                let (r, t) = (grid.r[i], grid.phi[j]);
                let rr = map.radius(r, t);
                let rr_r = map.radius_dr(r, t);
                let rr_t = map.radius_dtheta(r, t);
                if rr_r <= 0.0 {
                    return Err(MhsError::Geometry(format!(
                        "mapped radius not monotone at (r={r}, θ={t})"
                    )));
                }
                let sg = rr_r * rr;
                *sqrt_g.at_mut(i, j) = sg;
                *a_rr.at_mut(i, j) = (rr_t * rr_t + rr * rr) / sg;
                *a_rt.at_mut(i, j) = -rr_t / rr;
                *a_tt.at_mut(i, j) = rr_r / rr;
            }
        }
        let radius_r1 = grid.phi.iter().map(|&t| map.radius(1.0, t)).collect();
        let radius_dr_r1 = grid.phi.iter().map(|&t| map.radius_dr(1.0, t)).collect();
        let radius_dt_r1 = grid
            .phi
            .iter()
            .map(|&t| map.radius_dtheta(1.0, t))
            .collect();
        Ok(Self {
            grid: grid.clone(),
            sqrt_g,
            a_rr,
            a_rt,
            a_tt,
            radius_r1,
            radius_dr_r1,
            radius_dt_r1,
        })
    }

    /// Apply the mapped operator to nodal values.
    pub fn apply(&self, d: &DiffMatrix, v: &RMat) -> RMat {
        let vr = apply_radial(d, v);
        let vt = dtheta_rows(v);
        let (n_r, n_phi) = (self.grid.n_r, self.grid.n_phi);
        let mut fr = RMat::zeros(n_r, n_phi);
        let mut ft = RMat::zeros(n_r, n_phi);
        for i in 0..n_r {
            for j in 0..n_phi {
                *fr.at_mut(i, j) =
                    self.a_rr.at(i, j) * vr.at(i, j) + self.a_rt.at(i, j) * vt.at(i, j);
                *ft.at_mut(i, j) =
                    self.a_rt.at(i, j) * vr.at(i, j) + self.a_tt.at(i, j) * vt.at(i, j);
            }
        }
        let dfr = apply_radial(d, &fr);
        let dft = dtheta_rows(&ft);
        let mut out = RMat::zeros(n_r, n_phi);
        for i in 0..n_r {
            for j in 0..n_phi {
                *out.at_mut(i, j) = (dfr.at(i, j) + dft.at(i, j)) / self.sqrt_g.at(i, j);
            }
        }
        out
    }
}

/// Radial derivative of every column.
pub fn apply_radial(d: &DiffMatrix, v: &RMat) -> RMat {
    let (n_r, n_phi) = (v.n_rows, v.n_cols);
    let mut out = RMat::zeros(n_r, n_phi);
    let mut col = vec![0.0; n_r];
    for j in 0..n_phi {
        for i in 0..n_r {
            col[i] = v.at(i, j);
        }
        let dc = d.apply(&col);
        for i in 0..n_r {
            *out.at_mut(i, j) = dc[i];
        }
    }
    out
}

/// Spectral angular derivative of every row.
pub fn dtheta_rows(v: &RMat) -> RMat {
    let mut out = RMat::zeros(v.n_rows, v.n_cols);
    for i in 0..v.n_rows {
        let dr = fft::dtheta(v.row(i));
        for (j, val) in dr.into_iter().enumerate() {
            *out.at_mut(i, j) = val;
        }
    }
    out
}

/// Solve the divergence-form mapped Poisson problem by preconditioned
/// Richardson iteration, the preconditioner being the exact per-mode annulus
/// inverse (the ε=0 operator). Reduces to `solve_poisson` at the identity map.
pub fn solve_variable_coeff(
    source: &RMat,
    map: &DiffeoMap,
    dirichlet: (&BoundaryFourier, &BoundaryFourier),
    grid: &TensorGrid2D,
    solver: &ModeSolver,
) -> MhsResult<(ScalarField2D, usize)> {
    let op = MappedOperator::new(map, grid)?;
    let (n_r, n_phi) = (grid.n_r, grid.n_phi);
    let bc0: Vec<f64> = grid.phi.iter().map(|&t| dirichlet.0.eval(t)).collect();
    let bc1: Vec<f64> = grid.phi.iter().map(|&t| dirichlet.1.eval(t)).collect();
    // linear lift of the boundary data as the initial guess
    let mut v = RMat::zeros(n_r, n_phi);
    let span = grid.outer_radius - 1.0;
    for i in 0..n_r {
        let w = (grid.r[i] - 1.0) / span;
        for j in 0..n_phi {
            *v.at_mut(i, j) = (1.0 - w) * bc0[j] + w * bc1[j];
        }
    }
    let src_scale = source.a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let bc_scale = bc0
        .iter()
        .chain(&bc1)
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-11 * (1.0 + src_scale + bc_scale);
    let max_iter = 400;
    for it in 0..max_iter {
        let lv = op.apply(&solver.d, &v);
        let mut res = RMat::zeros(n_r, n_phi);
        let mut res_norm = 0.0f64;
        for i in 1..n_r - 1 {
            for j in 0..n_phi {
                let rv = source.at(i, j) - lv.at(i, j);
                *res.at_mut(i, j) = rv;
                res_norm = res_norm.max(rv.abs());
            }
        }
        if res_norm < tol {
            return Ok((ScalarField2D::from_values(grid, v), it));
        }
        // preconditioner: per-FFT-bin annulus solve with zero Dirichlet rows
        let mut ring_modes: Vec<Vec<Complex64>> = vec![vec![Complex64::ZERO; n_r]; n_phi];
        for i in 0..n_r {
            let hat = fft::fft_forward(res.row(i));
            for (bin, row) in ring_modes.iter_mut().enumerate() {
                row[i] = hat[bin];
            }
        }
        let corrections: Vec<MhsResult<Vec<Complex64>>> = (0..n_phi)
            .into_par_iter()
            .map(|bin| {
                let k = fft::bin_wavenumber(bin, n_phi);
                let prof = &ring_modes[bin];
                Ok(solver
                    .solve_mode(k, prof, (Complex64::ZERO, Complex64::ZERO))?
                    .values)
            })
            .collect();
        let corrections = corrections.into_iter().collect::<MhsResult<Vec<_>>>()?;
        for i in 0..n_r {
            let ring: Vec<Complex64> = (0..n_phi).map(|bin| corrections[bin][i]).collect();
            let upd = fft::fft_inverse_real(&ring);
            for j in 0..n_phi {
                *v.at_mut(i, j) += upd[j];
            }
        }
    }
    let lv = op.apply(&solver.d, &v);
    let mut worst = 0.0f64;
    for i in 1..n_r - 1 {
        for j in 0..n_phi {
            worst = worst.max((source.at(i, j) - lv.at(i, j)).abs());
        }
    }
    Err(MhsError::NonConvergence(format!(
        "mapped-domain Richardson iteration: residual {worst:.3e} after {max_iter} iterations"
    )))
}
