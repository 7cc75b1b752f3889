//! The Grad-Rubin fixed-point driver on the annulus: one iteration maps a
//! field B to W[f, B, A[B]^{-1}(...)] via footpoints -> boundary operator ->
//! current equation -> transport -> div-curl solve; the driver iterates to a
//! fixed point, reconstructs the pressure, and reports residuals.

use num_complex::Complex64;

use crate::current2d::{
    assemble_from_footpoints, harmonic_gauge_trace, solve_current_equation, JMode, OperatorMatrix,
};
use crate::divcurl2d::{self, boundary_potentials, interior_max, GaugeConstants};
use crate::elliptic2d::{apply_radial, dtheta_rows, ModeSolver};
use crate::error::{MhsError, MhsResult};
use crate::field::{BoundaryFourier, Field2D};
use crate::geometry::{make_grid, AnnulusSpec, TensorGrid2D};
use crate::num::dense::RMat;
use crate::num::dmatrix::DiffMatrix;
use crate::num::fft;
use crate::transport2d::{footpoints, transport_scalar, CurrentScalar2D};

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub k_cut: usize,
    pub n_r: usize,
    pub tol_fixed_point: f64,
    pub tol_residual: f64,
    pub max_iter: usize,
    /// damping factor in (0, 1]: B <- B + damping (T[B] - B)
    pub damping: f64,
    /// freeze the boundary operator at the initial field (quasi-iteration)
    pub reuse_operator: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            k_cut: 8,
            n_r: 64,
            tol_fixed_point: 1e-11,
            tol_residual: 1e-8,
            max_iter: 25,
            damping: 1.0,
            reuse_operator: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> MhsResult<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(MhsError::Config(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if self.max_iter == 0 {
            return Err(MhsError::Config("max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// Grad-Rubin boundary data: normal traces on both circles (outward normal)
/// and the tangential trace on the inflow circle.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub f_in: BoundaryFourier,
    pub f_out: BoundaryFourier,
    pub g: BoundaryFourier,
}

#[derive(Debug, Clone)]
pub struct IterationReport {
    pub iter: usize,
    pub increment: f64,
    /// ratio of this increment to the previous one (None on the first pass)
    pub contraction: Option<f64>,
    pub lambda: f64,
    pub j_gauge: f64,
    pub equation_residual: f64,
    pub cond_proxy: f64,
}

pub struct StepOutput {
    pub field: Field2D,
    pub current: CurrentScalar2D,
    pub j0: BoundaryFourier,
    pub lambda: f64,
    pub j_gauge: f64,
    pub equation_residual: f64,
    pub cond_proxy: f64,
}

/// One full Grad-Rubin map evaluation T[field]. A frozen operator may be
/// supplied; by default A is assembled fresh from the field's footpoints.
pub fn grad_rubin_step(
    field: &Field2D,
    data: &BoundaryData,
    grid: &TensorGrid2D,
    solver: &ModeSolver,
    operator: Option<&OperatorMatrix>,
    j_mode: JMode,
) -> MhsResult<StepOutput> {
    let fp = footpoints(field, grid)?;
    let assembled;
    let a = match operator {
        Some(a) => a,
        None => {
            assembled = assemble_from_footpoints(&fp, grid.k_cut, solver)?;
            &assembled
        }
    };
    let l = grid.outer_radius;
    let (h_minus, h_plus, lambda) = boundary_potentials(&data.f_in, &data.f_out, l)?;
    // "+d/drho" trace of the harmonic extension of the scalar potential data
    let mut v_trace = BoundaryFourier::zeros(grid.k_cut);
    let zeros = vec![Complex64::ZERO; grid.n_r];
    for k in -(grid.k_cut as i64)..=(grid.k_cut as i64) {
        let (b0, b1) = (h_minus.get(k), h_plus.get(k));
        if b0 == Complex64::ZERO && b1 == Complex64::ZERO {
            continue;
        }
        let u = solver.solve_mode(k, &zeros, (b0, b1))?;
        v_trace.set(k, solver.d.trace_first(&u.values));
    }
    let phi_trace = harmonic_gauge_trace(grid.k_cut, l);
    let sol = solve_current_equation(a, &data.g, &data.f_in, lambda, &v_trace, &phi_trace, j_mode)?;
    let current = transport_scalar(&sol.j0, &fp);
    let next = divcurl2d::solve_divcurl(
        &current,
        &data.f_in,
        &data.f_out,
        GaugeConstants {
            lambda,
            j_gauge: sol.j_gauge,
        },
        grid,
        solver,
    )?;
    Ok(StepOutput {
        field: next,
        current,
        j0: sol.j0,
        lambda,
        j_gauge: sol.j_gauge,
        equation_residual: sol.residual,
        cond_proxy: sol.cond_proxy,
    })
}

/// Convex blend (1-theta) a + theta b of two stream-form fields on the same
/// grid (gauge constants and mode profiles blend linearly).
pub fn blend(a: &Field2D, b: &Field2D, theta: f64) -> MhsResult<Field2D> {
    let grid = &a.grid;
    if b.grid.n_r != grid.n_r || b.grid.n_phi != grid.n_phi {
        return Err(MhsError::Config("blend of fields on different grids".into()));
    }
    let n = 2 * grid.k_cut + 1;
    let mut uhat = vec![Vec::new(); n];
    let (ua, ub) = (a.stream_profiles(), b.stream_profiles());
    for idx in 0..n {
        if ua[idx].is_empty() && ub[idx].is_empty() {
            continue;
        }
        let mut prof = vec![Complex64::ZERO; grid.n_r];
        for (i, p) in prof.iter_mut().enumerate() {
            let va = ua[idx].get(i).copied().unwrap_or(Complex64::ZERO);
            let vb = ub[idx].get(i).copied().unwrap_or(Complex64::ZERO);
            *p = va * (1.0 - theta) + vb * theta;
        }
        uhat[idx] = prof;
    }
    Field2D::from_stream(
        grid,
        (1.0 - theta) * a.lambda + theta * b.lambda,
        (1.0 - theta) * a.j_gauge + theta * b.j_gauge,
        &uhat,
    )
}

/// Pressure on the grid, anchored to p = 0 at (r, phi) = (1, 0), plus the
/// loop defect: the angular mean of dp/dtheta on the inner circle that had to
/// be dropped for p to be single-valued.
pub struct PressureField {
    pub values: RMat,
    pub loop_defect: f64,
}

/// Integrate grad p = j B^perp: angular antiderivative of q_theta on the
/// inner circle, then the radial ODE D p = q_r column by column.
pub fn reconstruct_pressure(
    field: &Field2D,
    current: &CurrentScalar2D,
    grid: &TensorGrid2D,
) -> MhsResult<PressureField> {
    let (n_r, n_phi) = (grid.n_r, grid.n_phi);
    let mut q_r = RMat::zeros(n_r, n_phi);
    let mut q_t = RMat::zeros(n_r, n_phi);
    for i in 0..n_r {
        for j in 0..n_phi {
            let jv = current.values.at(i, j);
            *q_r.at_mut(i, j) = -jv * field.b_phi.at(i, j);
            *q_t.at_mut(i, j) = jv * field.b_r.at(i, j);
        }
    }
    // p on the inner circle: spectral antiderivative of q_theta(1, .);
    // the dropped mean is the loop defect
    let row: Vec<f64> = (0..n_phi).map(|j| q_t.at(0, j)).collect();
    let hat = fft::fft_forward(&row);
    let loop_defect = -2.0 * std::f64::consts::PI * hat[0].re;
    let mut anti = vec![Complex64::ZERO; n_phi];
    for (bin, c) in hat.iter().enumerate() {
        let k = fft::bin_wavenumber(bin, n_phi);
        if k != 0 {
            anti[bin] = c / Complex64::new(0.0, k as f64);
        }
    }
    let p_in = fft::fft_inverse_real(&anti);
    // radial integration: D p = q_r with the inner row pinned to p_in
    let d = DiffMatrix::new(n_r, grid.h);
    let mut dp = d.dense();
    for j in 0..n_r {
        *dp.at_mut(0, j) = 0.0;
    }
    *dp.at_mut(0, 0) = 1.0;
    let lu = dp.to_complex().lu()?;
    let mut values = RMat::zeros(n_r, n_phi);
    for j in 0..n_phi {
        let mut rhs: Vec<f64> = (0..n_r).map(|i| q_r.at(i, j)).collect();
        rhs[0] = p_in[j];
        let col = lu.solve_real(&rhs);
        for i in 0..n_r {
            *values.at_mut(i, j) = col[i];
        }
    }
    let anchor = values.at(0, 0);
    for v in &mut values.a {
        *v -= anchor;
    }
    Ok(PressureField {
        values,
        loop_defect,
    })
}

/// Max-norm defects of the full MHS system for a candidate solution
/// (interior rows for the differential residuals, nodal values for traces).
#[derive(Debug, Clone)]
pub struct Residuals {
    pub divergence: f64,
    pub curl_mismatch: f64,
    pub force_r: f64,
    pub force_phi: f64,
    pub normal_inner: f64,
    pub normal_outer: f64,
    pub tangential_inner: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        [
            self.divergence,
            self.curl_mismatch,
            self.force_r,
            self.force_phi,
            self.normal_inner,
            self.normal_outer,
            self.tangential_inner,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn mhs_residuals(
    field: &Field2D,
    current: &CurrentScalar2D,
    pressure: &PressureField,
    data: &BoundaryData,
    grid: &TensorGrid2D,
) -> Residuals {
    let div = divcurl2d::divergence(field);
    let mut curl = divcurl2d::curl(field);
    for (c, jv) in curl.a.iter_mut().zip(&current.values.a) {
        *c -= jv;
    }
    let d = DiffMatrix::new(grid.n_r, grid.h);
    let gpr = apply_radial(&d, &pressure.values);
    let gpt = dtheta_rows(&pressure.values);
    let mut force_r = RMat::zeros(grid.n_r, grid.n_phi);
    let mut force_t = RMat::zeros(grid.n_r, grid.n_phi);
    for i in 0..grid.n_r {
        for j in 0..grid.n_phi {
            let jv = current.values.at(i, j);
            *force_r.at_mut(i, j) = gpr.at(i, j) - (-jv * field.b_phi.at(i, j));
            *force_t.at_mut(i, j) = gpt.at(i, j) / grid.r[i] - jv * field.b_r.at(i, j);
        }
    }
    let mut normal_inner = 0.0f64;
    let mut normal_outer = 0.0f64;
    let mut tangential_inner = 0.0f64;
    let tr_in = field.normal_trace(crate::geometry::BoundaryId::Inner);
    let tr_out = field.normal_trace(crate::geometry::BoundaryId::Outer);
    let tr_tan = field.tangential_trace_inner();
    for j in 0..grid.n_phi {
        let phi = grid.phi[j];
        normal_inner = normal_inner.max((tr_in[j] - data.f_in.eval(phi)).abs());
        normal_outer = normal_outer.max((tr_out[j] - data.f_out.eval(phi)).abs());
        tangential_inner = tangential_inner.max((tr_tan[j] - data.g.eval(phi)).abs());
    }
    Residuals {
        divergence: interior_max(&div),
        curl_mismatch: interior_max(&curl),
        force_r: interior_max(&force_r),
        force_phi: interior_max(&force_t),
        normal_inner,
        normal_outer,
        tangential_inner,
    }
}

pub struct Solution {
    pub field: Field2D,
    pub current: CurrentScalar2D,
    pub j0: BoundaryFourier,
    pub pressure: PressureField,
    pub residuals: Residuals,
    pub reports: Vec<IterationReport>,
}

/// Iterate the Grad-Rubin map from the current-free field determined by the
/// data's monopole content until the nodal increment drops below tolerance.
pub fn solve_fixed_point(
    domain: AnnulusSpec,
    data: &BoundaryData,
    config: &SolverConfig,
) -> MhsResult<Solution> {
    solve_fixed_point_mode(domain, data, config, JMode::PressureJ)
}

/// As `solve_fixed_point`, with the circulation constant either matched to
/// the pressure periodicity condition or held fixed.
pub fn solve_fixed_point_mode(
    domain: AnnulusSpec,
    data: &BoundaryData,
    config: &SolverConfig,
    j_mode: JMode,
) -> MhsResult<Solution> {
    config.validate()?;
    let grid = make_grid(domain, config.n_r, config.k_cut)?;
    let solver = ModeSolver::for_grid(&grid)?;
    let (_, _, lambda0) = boundary_potentials(&data.f_in, &data.f_out, grid.outer_radius)?;
    let empty = vec![Vec::new(); 2 * grid.k_cut + 1];
    let mut field = Field2D::from_stream(&grid, lambda0, 0.0, &empty)?;
    let frozen = if config.reuse_operator {
        let fp = footpoints(&field, &grid)?;
        Some(assemble_from_footpoints(&fp, grid.k_cut, &solver)?)
    } else {
        None
    };
    let mut reports = Vec::new();
    let mut prev_increment: Option<f64> = None;
    let mut expanding_streak = 0usize;
    let mut last: Option<(CurrentScalar2D, BoundaryFourier)> = None;
    let mut converged = false;
    for iter in 0..config.max_iter {
        let step = grad_rubin_step(
            &field,
            data,
            &grid,
            &solver,
            frozen.as_ref(),
            j_mode,
        )?;
        let next = if config.damping < 1.0 {
            blend(&field, &step.field, config.damping)?
        } else {
            step.field
        };
        let increment = next.max_nodal_diff(&field);
        let contraction = prev_increment.map(|p| increment / p.max(1e-300));
        if let Some(c) = contraction {
            if c >= 1.0 {
                expanding_streak += 1;
                if expanding_streak >= 3 {
                    return Err(MhsError::NonContraction(format!(
                        "increment grew for 3 consecutive iterations (last ratio {c:.3})"
                    )));
                }
            } else {
                expanding_streak = 0;
            }
        }
        reports.push(IterationReport {
            iter,
            increment,
            contraction,
            lambda: step.lambda,
            j_gauge: step.j_gauge,
            equation_residual: step.equation_residual,
            cond_proxy: step.cond_proxy,
        });
        field = next;
        last = Some((step.current, step.j0));
        if increment < config.tol_fixed_point {
            converged = true;
            break;
        }
        prev_increment = Some(increment);
    }
    if !converged {
        return Err(MhsError::NonConvergence(format!(
            "fixed point not reached in {} iterations (last increment {:.3e})",
            config.max_iter,
            reports.last().map(|r| r.increment).unwrap_or(f64::NAN)
        )));
    }
    let (current, j0) = last.expect("at least one iteration ran");
    let pressure = reconstruct_pressure(&field, &current, &grid)?;
    let residuals = mhs_residuals(&field, &current, &pressure, data, &grid);
    if residuals.max() > config.tol_residual {
        return Err(MhsError::NonConvergence(format!(
            "converged iterate violates residual tolerance: {:.3e} > {:.3e}",
            residuals.max(),
            config.tol_residual
        )));
    }
    Ok(Solution {
        field,
        current,
        j0,
        pressure,
        residuals,
        reports,
    })
}

/// Boundary data whose exact solution is the reference field: f = B0 n,
/// g = 0.
pub fn reference_data(k_cut: usize, outer_radius: f64) -> BoundaryData {
    BoundaryData {
        f_in: BoundaryFourier::from_modes(k_cut, &[(0, Complex64::new(-1.0, 0.0))]),
        f_out: BoundaryFourier::from_modes(k_cut, &[(0, Complex64::new(1.0 / outer_radius, 0.0))]),
        g: BoundaryFourier::zeros(k_cut),
    }
}

/// The standard perturbed data set: f = B0 n + delta cos(phi) on the inner
/// circle, g = delta sin(phi).
pub fn perturbed_data(k_cut: usize, outer_radius: f64, delta: f64) -> BoundaryData {
    let mut data = reference_data(k_cut, outer_radius);
    data.f_in.set(1, Complex64::new(delta / 2.0, 0.0));
    data.f_in.set(-1, Complex64::new(delta / 2.0, 0.0));
    data.g.set(1, Complex64::new(0.0, -delta / 2.0));
    data.g.set(-1, Complex64::new(0.0, delta / 2.0));
    data
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_data_is_a_fixed_point() {
        let spec = AnnulusSpec::new(2.0).unwrap();
        let config = SolverConfig {
            k_cut: 4,
            n_r: 64,
            ..Default::default()
        };
        let grid = make_grid(spec, config.n_r, config.k_cut).unwrap();
        let solver = ModeSolver::for_grid(&grid).unwrap();
        let data = reference_data(config.k_cut, 2.0);
        let b0 = Field2D::reference(&grid);
        let step = grad_rubin_step(&b0, &data, &grid, &solver, None, JMode::PressureJ).unwrap();
        assert!(
            step.field.max_nodal_diff(&b0) < 1e-9,
            "increment {}",
            step.field.max_nodal_diff(&b0)
        );
        assert!(step.j0.norm_inf_coeff() < 1e-10);
        assert!((step.lambda - 0.5).abs() < 1e-14);
        assert!(step.j_gauge.abs() < 1e-10);
    }

    #[test]
    fn perturbed_data_converges_with_small_contraction() {
        let spec = AnnulusSpec::new(2.0).unwrap();
        let config = SolverConfig {
            k_cut: 8,
            n_r: 64,
            ..Default::default()
        };
        let data = perturbed_data(8, 2.0, 0.01);
        let sol = solve_fixed_point(spec, &data, &config).unwrap();
        for r in sol.reports.iter().skip(1) {
            if r.increment > 1e-13 {
                assert!(
                    r.contraction.unwrap() < 0.5,
                    "contraction {:?}",
                    r.contraction
                );
            }
        }
        assert!(sol.residuals.max() < 1e-8, "{:?}", sol.residuals);
        assert!(sol.pressure.loop_defect.abs() < 1e-8);
        assert!((sol.reports.last().unwrap().lambda - 0.5).abs() < 1e-12);
    }

    #[test]
    fn damped_iteration_reaches_same_fixed_point() {
        let spec = AnnulusSpec::new(2.0).unwrap();
        let data = perturbed_data(6, 2.0, 0.01);
        let full = solve_fixed_point(
            spec,
            &data,
            &SolverConfig {
                k_cut: 6,
                n_r: 64,
                ..Default::default()
            },
        )
        .unwrap();
        let damped = solve_fixed_point(
            spec,
            &data,
            &SolverConfig {
                k_cut: 6,
                n_r: 64,
                damping: 0.6,
                max_iter: 60,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(full.field.max_nodal_diff(&damped.field) < 1e-9);
        assert!(damped.reports.len() > full.reports.len());
    }

    #[test]
    fn frozen_operator_converges_too() {
        let spec = AnnulusSpec::new(2.0).unwrap();
        let data = perturbed_data(6, 2.0, 0.005);
        let sol = solve_fixed_point(
            spec,
            &data,
            &SolverConfig {
                k_cut: 6,
                n_r: 64,
                reuse_operator: true,
                // the frozen-operator fixed point satisfies the tangential
                // condition only to O(delta * |A[B]-A[B0]|)
                tol_residual: 1e-5,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(sol.residuals.divergence < 1e-9);
        assert!(sol.residuals.curl_mismatch < 1e-9);
        assert!(sol.residuals.max() < 1e-5);
    }

    #[test]
    fn pressure_force_balance() {
        let spec = AnnulusSpec::new(2.0).unwrap();
        let config = SolverConfig {
            k_cut: 8,
            n_r: 64,
            ..Default::default()
        };
        let data = perturbed_data(8, 2.0, 0.01);
        let sol = solve_fixed_point(spec, &data, &config).unwrap();
        assert!(sol.residuals.force_r < 1e-9, "{}", sol.residuals.force_r);
        assert!(sol.residuals.force_phi < 1e-9, "{}", sol.residuals.force_phi);
        // anchored at the inner circle, phi = 0
        assert_eq!(sol.pressure.values.at(0, 0), 0.0);
    }

    #[test]
    fn blend_endpoints() {
        let grid = make_grid(AnnulusSpec::new(2.0).unwrap(), 32, 2).unwrap();
        let a = Field2D::reference(&grid);
        let mut uhat = vec![Vec::new(); 5];
        uhat[3] = grid
            .r
            .iter()
            .map(|&r| Complex64::new((r - 1.0) * (2.0 - r), 0.0))
            .collect();
        let b = Field2D::from_stream(&grid, 0.2, 0.1, &uhat).unwrap();
        assert!(blend(&a, &b, 1.0).unwrap().max_nodal_diff(&b) < 1e-14);
        assert!(blend(&a, &b, 0.0).unwrap().max_nodal_diff(&a) < 1e-14);
        let mid = blend(&a, &b, 0.5).unwrap();
        assert!((mid.lambda - 0.35).abs() < 1e-15);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let bad = SolverConfig {
            damping: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
