//! Divergence-free field reconstruction on the annulus with prescribed curl
//! and normal trace: W = lambda * B_mono + rot-grad of the stream function
//! + J * (harmonic tangent field).

use num_complex::Complex64;

use crate::error::{MhsError, MhsResult};
use crate::field::{BoundaryFourier, Field2D};
use crate::elliptic2d::{solve_poisson, ModeSolver};
use crate::geometry::TensorGrid2D;
use crate::num::dense::RMat;
use crate::num::dmatrix::DiffMatrix;
use crate::transport2d::CurrentScalar2D;

/// B_mono = grad ln(x^2+y^2) = 2x/|x|^2, the flux-carrying gauge field.
pub fn monopole_field(p: [f64; 2]) -> MhsResult<[f64; 2]> {
    let r2 = p[0] * p[0] + p[1] * p[1];
    if r2 == 0.0 {
        return Err(MhsError::Geometry("monopole field evaluated at the origin".into()));
    }
    Ok([2.0 * p[0] / r2, 2.0 * p[1] / r2])
}

/// B0 = x/|x|^2, the reference field of the fixed point.
pub fn reference_field(p: [f64; 2]) -> MhsResult<[f64; 2]> {
    let r2 = p[0] * p[0] + p[1] * p[1];
    if r2 == 0.0 {
        return Err(MhsError::Geometry("reference field evaluated at the origin".into()));
    }
    Ok([p[0] / r2, p[1] / r2])
}

/// Gauge strengths of the two non-unique pieces of the div-curl solution.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaugeConstants {
    pub lambda: f64,
    pub j_gauge: f64,
}

/// From normal-trace data (f on inner and outer circles, outward normal
/// convention), compute the monopole strength lambda cancelling the inner
/// flux and the boundary potentials h± (arclength antiderivatives of the
/// lambda-corrected flux densities). The compatibility condition is total
/// flux zero: 2π f̂₋(0) + 2πL f̂₊(0) = 0.
pub fn boundary_potentials(
    f_in: &BoundaryFourier,
    f_out: &BoundaryFourier,
    outer_radius: f64,
) -> MhsResult<(BoundaryFourier, BoundaryFourier, f64)> {
    let l = outer_radius;
    let lambda = -f_in.get(0).re / 2.0;
    // corrected mode-0 flux densities: B_mono·n = -2 at r=1, +2/L at r=L
    let rem_in = f_in.get(0) + Complex64::new(2.0 * lambda, 0.0);
    let rem_out = f_out.get(0) - Complex64::new(2.0 * lambda / l, 0.0);
    let scale = f_in.norm_inf_coeff().max(f_out.norm_inf_coeff()).max(1.0);
    if rem_in.norm() > 1e-10 * scale || rem_out.norm() > 1e-10 * scale {
        return Err(MhsError::Config(format!(
            "flux compatibility violated: residual component fluxes {:.3e} (inner), {:.3e} (outer)",
            rem_in.norm(),
            rem_out.norm()
        )));
    }
    let k_cut = f_in.k_cut.max(f_out.k_cut);
    let mut h_minus = BoundaryFourier::zeros(k_cut);
    let mut h_plus = BoundaryFourier::zeros(k_cut);
    for k in -(k_cut as i64)..=(k_cut as i64) {
        if k == 0 {
            continue;
        }
        let ik = Complex64::new(0.0, k as f64);
        h_minus.set(k, f_in.get(k) / ik);
        h_plus.set(k, f_out.get(k) * l / ik);
    }
    Ok((h_minus, h_plus, lambda))
}

/// The generator of the 1D space of curl- and divergence-free fields tangent
/// to both boundaries: e_theta / (r ln L).
pub fn harmonic_tangent_field(grid: &TensorGrid2D) -> Field2D {
    let uhat = vec![Vec::new(); 2 * grid.k_cut + 1];
    Field2D::from_stream(grid, 0.0, 1.0, &uhat).expect("zero stream profiles are valid")
}

/// Solve curl W = j, div W = 0, W·n = f with the given gauge strengths.
pub fn solve_divcurl(
    j: &CurrentScalar2D,
    f_in: &BoundaryFourier,
    f_out: &BoundaryFourier,
    gauges: GaugeConstants,
    grid: &TensorGrid2D,
    solver: &ModeSolver,
) -> MhsResult<Field2D> {
    let (h_minus, h_plus, lambda) = boundary_potentials(f_in, f_out, grid.outer_radius)?;
    if (lambda - gauges.lambda).abs() > 1e-12 * (1.0 + lambda.abs()) {
        return Err(MhsError::Config(format!(
            "gauge lambda {} inconsistent with the flux-determined value {}",
            gauges.lambda, lambda
        )));
    }
    let u = solve_poisson(j, (&h_minus, &h_plus), grid, solver)?;
    Field2D::from_stream(grid, lambda, gauges.j_gauge, &u.modes)
}

/// Nodal polar divergence (1/r) D(r B_r) + (1/r) dθ B_phi.
pub fn divergence(field: &Field2D) -> RMat {
    let grid = &field.grid;
    let d = DiffMatrix::new(grid.n_r, grid.h);
    let mut rbr = RMat::zeros(grid.n_r, grid.n_phi);
    for i in 0..grid.n_r {
        for j in 0..grid.n_phi {
            *rbr.at_mut(i, j) = grid.r[i] * field.b_r.at(i, j);
        }
    }
    let drbr = crate::elliptic2d::apply_radial(&d, &rbr);
    let dtbp = crate::elliptic2d::dtheta_rows(&field.b_phi);
    let mut out = RMat::zeros(grid.n_r, grid.n_phi);
    for i in 0..grid.n_r {
        for j in 0..grid.n_phi {
            *out.at_mut(i, j) = (drbr.at(i, j) + dtbp.at(i, j)) / grid.r[i];
        }
    }
    out
}

/// Nodal scalar curl (1/r) D(r B_phi) - (1/r) dθ B_r.
pub fn curl(field: &Field2D) -> RMat {
    let grid = &field.grid;
    let d = DiffMatrix::new(grid.n_r, grid.h);
    let mut rbp = RMat::zeros(grid.n_r, grid.n_phi);
    for i in 0..grid.n_r {
        for j in 0..grid.n_phi {
            *rbp.at_mut(i, j) = grid.r[i] * field.b_phi.at(i, j);
        }
    }
    let drbp = crate::elliptic2d::apply_radial(&d, &rbp);
    let dtbr = crate::elliptic2d::dtheta_rows(&field.b_r);
    let mut out = RMat::zeros(grid.n_r, grid.n_phi);
    for i in 0..grid.n_r {
        for j in 0..grid.n_phi {
            *out.at_mut(i, j) = (drbp.at(i, j) - dtbr.at(i, j)) / grid.r[i];
        }
    }
    out
}

/// Max of |m| over interior rows (the edge rows of the composed operator
/// carry the one-sided-stencil truncation error and are reported separately).
pub fn interior_max(m: &RMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 2..m.n_rows.saturating_sub(2) {
        for j in 0..m.n_cols {
            worst = worst.max(m.at(i, j).abs());
        }
    }
    worst
}
