//! Near-annular mapped domains: the boundary operator of the pushforward
//! reference field, its deviation from the annulus operator, and the
//! fixed-point solve on the mapped domain.
//!
//! Everything is computed in reference coordinates. The stream function u of
//! the mapped field satisfies L u = j (L the divergence-form pullback of the
//! Laplacian) and the tangential trace on the inner boundary is -n.grad u at
//! the image point, which reduces to the "+d/drho" convention at the
//! identity map. The reference-coordinate characteristics of the mapped
//! field coincide with those of e_z x grad u (the pullback only
//! reparametrizes them), so footpoint tracing and transport reuse the
//! annulus machinery on the stream field.

use num_complex::Complex64;

use crate::current2d::{solve_current_equation, JMode, OperatorMatrix};
use crate::divcurl2d::boundary_potentials;
use crate::elliptic2d::{
    apply_radial, dtheta_rows, solve_variable_coeff, MappedOperator, ModeSolver, ScalarField2D,
};
use crate::error::{MhsError, MhsResult};
use crate::field::{BoundaryFourier, Field2D};
use crate::geometry::{make_grid, DiffeoMap, TensorGrid2D};
use crate::gradrubin2d::{BoundaryData, IterationReport, SolverConfig};
use crate::num::dense::{CMat, RMat};
use crate::num::fft;
use crate::transport2d::{footpoints, transport_scalar};

/// Tangential trace samples of a stream function on the inner boundary of
/// the mapped domain: -(n . grad_x v) at the image points, parameterized by
/// the reference angle. vr, vt are the reference-coordinate partials at r=1.
fn trace_from_partials(map: &DiffeoMap, phi: &[f64], vr: &[f64], vt: &[f64]) -> Vec<f64> {
    phi.iter()
        .enumerate()
        .map(|(j, &t)| {
            let rr = map.radius(1.0, t);
            let rr_r = map.radius_dr(1.0, t);
            let rr_t = map.radius_dtheta(1.0, t);
            // (d gamma)^{-T} applied to (vr, vt) in the image polar frame
            let gx = vr[j] / rr_r;
            let gy = (-rr_t * vr[j] + rr_r * vt[j]) / (rr_r * rr);
            // pushforward of the inner normal -e_r, then renormalized
            let (nx, ny) = (-rr, rr_t);
            let nn = (nx * nx + ny * ny).sqrt();
            -(nx * gx + ny * gy) / nn
        })
        .collect()
}

/// Tangential trace of nodal stream values on the inner boundary.
pub fn mapped_tangential_trace(
    map: &DiffeoMap,
    grid: &TensorGrid2D,
    solver: &ModeSolver,
    values: &RMat,
) -> Vec<f64> {
    let dv = apply_radial(&solver.d, values);
    let vr: Vec<f64> = (0..grid.n_phi).map(|j| dv.at(0, j)).collect();
    let vt = fft::dtheta(values.row(0));
    trace_from_partials(map, &grid.phi, &vr, &vt)
}

/// Assemble the boundary operator of the pushforward reference field on the
/// mapped domain: column k is the tangential trace of L^{-1} applied to the
/// ray-transported current e^{ik theta}, in the same mode convention as the
/// annulus operator.
pub fn assemble_mapped_reference_operator(
    map: &DiffeoMap,
    grid: &TensorGrid2D,
    solver: &ModeSolver,
) -> MhsResult<OperatorMatrix> {
    let kc = grid.k_cut as i64;
    let n = 2 * grid.k_cut + 1;
    let zero = BoundaryFourier::zeros(grid.k_cut);
    let mut mat = CMat::zeros(n);
    for k in -kc..=kc {
        // real and imaginary parts of the constant-in-r source e^{ik theta}
        let mut tr = vec![Complex64::ZERO; grid.n_phi];
        for (part, imag) in [(0usize, false), (1usize, true)] {
            if imag && k == 0 {
                continue;
            }
            let _ = part;
            let mut src = RMat::zeros(grid.n_r, grid.n_phi);
            for i in 0..grid.n_r {
                for j in 0..grid.n_phi {
                    let a = k as f64 * grid.phi[j];
                    *src.at_mut(i, j) = if imag { a.sin() } else { a.cos() };
                }
            }
            let (v, _) = solve_variable_coeff(&src, map, (&zero, &zero), grid, solver)?;
            let t = mapped_tangential_trace(map, grid, solver, &v.values);
            for (slot, val) in tr.iter_mut().zip(t) {
                *slot += if imag {
                    Complex64::new(0.0, val)
                } else {
                    Complex64::new(val, 0.0)
                };
            }
        }
        let hat = fft::fft_forward_c(&tr);
        for m in -kc..=kc {
            *mat.at_mut((kc + m) as usize, (kc + k) as usize) =
                hat[fft::wavenumber_bin(m, grid.n_phi)];
        }
    }
    Ok(OperatorMatrix {
        k_cut: grid.k_cut,
        mat,
        fingerprint: 0,
    })
}

/// Max-norm deviation of the mapped boundary operator from the annulus one
/// at bump amplitude eps, and the stability constant diff/eps.
#[derive(Debug, Clone)]
pub struct MappedComparison {
    pub eps: f64,
    pub diff_norm: f64,
    pub stability_c: f64,
}

pub fn mapped_operator_deviation(
    outer_radius: f64,
    k_cut: usize,
    n_r: usize,
    eps: f64,
) -> MhsResult<MappedComparison> {
    let grid = make_grid(crate::geometry::AnnulusSpec::new(outer_radius)?, n_r, k_cut)?;
    let solver = ModeSolver::for_grid(&grid)?;
    let map = DiffeoMap::radial_bump(outer_radius, eps);
    let a_u = assemble_mapped_reference_operator(&map, &grid, &solver)?;
    let kc = k_cut as i64;
    let mut diff = 0.0f64;
    for k in -kc..=kc {
        for m in -kc..=kc {
            let annulus = if m == k {
                Complex64::new(crate::current2d::closed_form_multiplier(k, outer_radius), 0.0)
            } else {
                Complex64::ZERO
            };
            diff = diff.max((a_u.entry(m, k) - annulus).norm());
        }
    }
    Ok(MappedComparison {
        eps,
        diff_norm: diff,
        stability_c: if eps > 0.0 { diff / eps } else { 0.0 },
    })
}

/// Fixed point of the Grad-Rubin map on the mapped domain (quasi-iteration:
/// the boundary operator is frozen at the ray-footpoint reference assembly;
/// the per-step footpoint transport carries the nonlinearity and the frozen
/// operator's trace defect is corrected with the previous iterate).
pub struct MappedSolution {
    /// reference-coordinate stream field (its characteristics are those of
    /// the mapped field)
    pub field: Field2D,
    pub j0: BoundaryFourier,
    pub lambda: f64,
    pub j_gauge: f64,
    /// final tangential-condition defect on the inner boundary (nodal max)
    pub tangential_residual: f64,
    pub reports: Vec<IterationReport>,
}

struct MappedSetup {
    grid: TensorGrid2D,
    solver: ModeSolver,
    lambda: f64,
    /// harmonic data part v and the single-valued monopole correction w
    base_stream: RMat,
    /// gauge stream (unit J)
    phi_stream: RMat,
    /// tangential traces of the fixed parts
    v_trace: BoundaryFourier,
    mono_trace: BoundaryFourier,
    phi_trace: BoundaryFourier,
    a_u: OperatorMatrix,
}

fn mapped_setup(map: &DiffeoMap, data: &BoundaryData, config: &SolverConfig) -> MhsResult<MappedSetup> {
    let grid = make_grid(
        crate::geometry::AnnulusSpec::new(map.outer_radius)?,
        config.n_r,
        config.k_cut,
    )?;
    let solver = ModeSolver::for_grid(&grid)?;
    let op = MappedOperator::new(map, &grid)?;
    let (h_minus, h_plus, lambda) = boundary_potentials(&data.f_in, &data.f_out, map.outer_radius)?;
    let zero_src = RMat::zeros(grid.n_r, grid.n_phi);
    let (v, _) = solve_variable_coeff(&zero_src, map, (&h_minus, &h_plus), &grid, &solver)?;
    let v_trace = BoundaryFourier::from_samples(
        &mapped_tangential_trace(map, &grid, &solver, &v.values),
        grid.k_cut,
    );
    // gauge generator: harmonic on the mapped domain, 0 inner / 1 outer,
    // normalized like ln r / ln L at the identity map
    let one_out = BoundaryFourier::from_modes(grid.k_cut, &[(0, Complex64::ONE)]);
    let zero_bf = BoundaryFourier::zeros(grid.k_cut);
    let (u_phi, _) = solve_variable_coeff(&zero_src, map, (&zero_bf, &one_out), &grid, &solver)?;
    let phi_trace = BoundaryFourier::from_samples(
        &mapped_tangential_trace(map, &grid, &solver, &u_phi.values),
        grid.k_cut,
    );
    // monopole stream -2 lambda theta is multivalued: the analytic part is
    // handled in closed form, the single-valued correction w solves
    // L w = 2 lambda L(theta) with zero Dirichlet data
    let lt_r = apply_radial(&solver.d, &op.a_rt);
    let lt_t = dtheta_rows(&op.a_tt);
    let mut w_src = RMat::zeros(grid.n_r, grid.n_phi);
    for i in 0..grid.n_r {
        for j in 0..grid.n_phi {
            *w_src.at_mut(i, j) =
                2.0 * lambda * (lt_r.at(i, j) + lt_t.at(i, j)) / op.sqrt_g.at(i, j);
        }
    }
    let (w, _) = solve_variable_coeff(&w_src, map, (&zero_bf, &zero_bf), &grid, &solver)?;
    // trace of the analytic theta part: partials (0, -2 lambda) at r = 1
    let zeros = vec![0.0; grid.n_phi];
    let mtheta = vec![-2.0 * lambda; grid.n_phi];
    let mut mono_samples = trace_from_partials(map, &grid.phi, &zeros, &mtheta);
    let w_tr = mapped_tangential_trace(map, &grid, &solver, &w.values);
    for (m, t) in mono_samples.iter_mut().zip(w_tr) {
        *m += t;
    }
    let mono_trace = BoundaryFourier::from_samples(&mono_samples, grid.k_cut);
    let mut base_stream = v.values;
    for (b, wv) in base_stream.a.iter_mut().zip(&w.values.a) {
        *b += wv;
    }
    let a_u = assemble_mapped_reference_operator(map, &grid, &solver)?;
    Ok(MappedSetup {
        grid,
        solver,
        lambda,
        base_stream,
        phi_stream: u_phi.values,
        v_trace,
        mono_trace,
        phi_trace,
        a_u,
    })
}

fn stream_field(
    setup: &MappedSetup,
    particular: Option<&RMat>,
    j_gauge: f64,
) -> MhsResult<Field2D> {
    let mut total = setup.base_stream.clone();
    for (t, p) in total.a.iter_mut().zip(&setup.phi_stream.a) {
        *t += j_gauge * p;
    }
    if let Some(up) = particular {
        for (t, u) in total.a.iter_mut().zip(&up.a) {
            *t += u;
        }
    }
    let modes = ScalarField2D::from_values(&setup.grid, total).modes;
    Field2D::from_stream(&setup.grid, setup.lambda, 0.0, &modes)
}

pub fn solve_mapped_fixed_point(
    map: &DiffeoMap,
    data: &BoundaryData,
    config: &SolverConfig,
) -> MhsResult<MappedSolution> {
    config.validate()?;
    let setup = mapped_setup(map, data, config)?;
    let grid = &setup.grid;
    let kc = grid.k_cut as i64;
    let zero_bf = BoundaryFourier::zeros(grid.k_cut);
    let mut field = stream_field(&setup, None, 0.0)?;
    let mut j0 = BoundaryFourier::zeros(grid.k_cut);
    let mut j_gauge = 0.0f64;
    let mut particular: Option<RMat> = None;
    let mut reports: Vec<IterationReport> = Vec::new();
    let mut prev_increment: Option<f64> = None;
    let mut expanding_streak = 0usize;
    let mut converged = false;
    for iter in 0..config.max_iter {
        let fp = footpoints(&field, grid)?;
        // frozen-operator defect at the previous current iterate
        let mut defect = BoundaryFourier::zeros(grid.k_cut);
        if j0.norm_inf_coeff() > 0.0 {
            let src = transport_scalar(&j0, &fp);
            let (u_p, _) =
                solve_variable_coeff(&src.values, map, (&zero_bf, &zero_bf), grid, &setup.solver)?;
            let tr = BoundaryFourier::from_samples(
                &mapped_tangential_trace(map, grid, &setup.solver, &u_p.values),
                grid.k_cut,
            );
            let coeffs: Vec<Complex64> = (-kc..=kc).map(|k| j0.get(k)).collect();
            let aj = setup.a_u.mat.matvec(&coeffs);
            for k in -kc..=kc {
                defect.set(k, tr.get(k) - aj[(kc + k) as usize]);
            }
        }
        let mut v_eff = BoundaryFourier::zeros(grid.k_cut);
        for k in -kc..=kc {
            v_eff.set(
                k,
                setup.v_trace.get(k) + setup.mono_trace.get(k) + defect.get(k),
            );
        }
        let sol = solve_current_equation(
            &setup.a_u,
            &data.g,
            &data.f_in,
            setup.lambda,
            &v_eff,
            &setup.phi_trace,
            JMode::PressureJ,
        )?;
        let src = transport_scalar(&sol.j0, &fp);
        let (u_p, _) =
            solve_variable_coeff(&src.values, map, (&zero_bf, &zero_bf), grid, &setup.solver)?;
        let next = stream_field(&setup, Some(&u_p.values), sol.j_gauge)?;
        let increment = next.max_nodal_diff(&field);
        let contraction = prev_increment.map(|p| increment / p.max(1e-300));
        if let Some(c) = contraction {
            if c >= 1.0 {
                expanding_streak += 1;
                if expanding_streak >= 3 {
                    return Err(MhsError::NonContraction(format!(
                        "mapped iteration grew for 3 consecutive steps (last ratio {c:.3})"
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
            lambda: setup.lambda,
            j_gauge: sol.j_gauge,
            equation_residual: sol.residual,
            cond_proxy: sol.cond_proxy,
        });
        field = next;
        j0 = sol.j0;
        j_gauge = sol.j_gauge;
        particular = Some(u_p.values);
        if increment < config.tol_fixed_point {
            converged = true;
            break;
        }
        prev_increment = Some(increment);
    }
    if !converged {
        return Err(MhsError::NonConvergence(format!(
            "mapped fixed point not reached in {} iterations (last increment {:.3e})",
            config.max_iter,
            reports.last().map(|r| r.increment).unwrap_or(f64::NAN)
        )));
    }
    // measured tangential condition on the final iterate
    let mut total = setup.base_stream.clone();
    for (t, p) in total.a.iter_mut().zip(&setup.phi_stream.a) {
        *t += j_gauge * p;
    }
    if let Some(up) = &particular {
        for (t, u) in total.a.iter_mut().zip(&up.a) {
            *t += u;
        }
    }
    let mut tr = mapped_tangential_trace(map, grid, &setup.solver, &total);
    let zeros = vec![0.0; grid.n_phi];
    let mtheta = vec![-2.0 * setup.lambda; grid.n_phi];
    let mono = trace_from_partials(map, &grid.phi, &zeros, &mtheta);
    let mut tangential_residual = 0.0f64;
    for j in 0..grid.n_phi {
        tr[j] += mono[j];
        tangential_residual = tangential_residual.max((tr[j] - data.g.eval(grid.phi[j])).abs());
    }
    Ok(MappedSolution {
        field,
        j0,
        lambda: setup.lambda,
        j_gauge,
        tangential_residual,
        reports,
    })
}
