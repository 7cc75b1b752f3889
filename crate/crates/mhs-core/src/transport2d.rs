//! Characteristic tracing of the magnetic field and transport of the scalar
//! current from the inflow boundary.

use rayon::prelude::*;

use crate::error::{MhsError, MhsResult};
use crate::field::{BoundaryFourier, FieldEval};
use crate::geometry::TensorGrid2D;
use crate::num::dense::RMat;
use crate::num::ode::{dp_step, integrate_until, OdeOpts};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceDirection {
    Forward,
    Backward,
}

/// One traced characteristic: points with their flow parameters and the
/// bisection-refined boundary crossing.
#[derive(Debug, Clone)]
pub struct TracePath {
    pub points: Vec<[f64; 2]>,
    pub params: Vec<f64>,
    pub exit_point: [f64; 2],
    pub exit_param: f64,
}

impl TracePath {
    pub fn exit_angle(&self) -> f64 {
        self.exit_point[1].atan2(self.exit_point[0])
    }
}

/// Floor on |B| along a path, relative to nothing: the admissibility
/// preconditions guarantee |B| is bounded below; a hard absolute floor
/// catches fields drifting out of the hypothesis class.
const SPEED_FLOOR: f64 = 1e-8;
const RADIUS_TOL: f64 = 1e-12;

fn trace_from(
    field: &dyn FieldEval,
    outer_radius: f64,
    start: [f64; 2],
    direction: TraceDirection,
    record: bool,
) -> MhsResult<TracePath> {
    let sign = match direction {
        TraceDirection::Forward => 1.0,
        TraceDirection::Backward => -1.0,
    };
    let target = match direction {
        TraceDirection::Forward => outer_radius,
        TraceDirection::Backward => 1.0,
    };
    let rhs = |_s: f64, y: &[f64]| {
        let b = field.eval([y[0], y[1]]);
        vec![sign * b[0], sign * b[1]]
    };
    let radius = |y: &[f64]| (y[0] * y[0] + y[1] * y[1]).sqrt();
    let crossed = |y: &[f64]| match direction {
        TraceDirection::Forward => radius(y) >= target,
        TraceDirection::Backward => radius(y) <= target,
    };

    let r0 = radius(&start);
    if (r0 - target).abs() <= RADIUS_TOL || crossed(&[start[0], start[1]]) {
        return Ok(TracePath {
            points: vec![start],
            params: vec![0.0],
            exit_point: start,
            exit_param: 0.0,
        });
    }

    let mut points = vec![start];
    let mut params = vec![0.0];
    let mut prev_s = 0.0;
    let mut prev_y = vec![start[0], start[1]];
    let mut vanished = false;
    let opts = OdeOpts::default();
    let stop = |s: f64, y: &[f64]| {
        let b = field.eval([y[0], y[1]]);
        if (b[0] * b[0] + b[1] * b[1]).sqrt() < SPEED_FLOOR {
            vanished = true;
            return true;
        }
        if crossed(y) {
            return true;
        }
        prev_s = s;
        prev_y = y.to_vec();
        if record && s > 0.0 {
            points.push([y[0], y[1]]);
            params.push(s);
        }
        false
    };
    let (s_end, _y_end, _h) = integrate_until(&rhs, 0.0, &[start[0], start[1]], &opts, stop)
        .map_err(MhsError::Transport)?;
    if vanished {
        return Err(MhsError::Transport(format!(
            "field magnitude fell below {SPEED_FLOOR} along a characteristic from ({}, {})",
            start[0], start[1]
        )));
    }

    // refine the crossing by bisection on the sub-step length from the last
    // pre-crossing state
    let mut lo = 0.0;
    let mut hi = s_end - prev_s;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (y_mid, _) = dp_step(&rhs, prev_s, &prev_y, mid);
        if crossed(&y_mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        let (y_hi, _) = dp_step(&rhs, prev_s, &prev_y, hi);
        if (radius(&y_hi) - target).abs() < RADIUS_TOL {
            break;
        }
    }
    let (y_exit, _) = dp_step(&rhs, prev_s, &prev_y, hi);
    let exit_param = prev_s + hi;
    if record {
        points.push([y_exit[0], y_exit[1]]);
        params.push(exit_param);
    }
    Ok(TracePath {
        points,
        params,
        exit_point: [y_exit[0], y_exit[1]],
        exit_param,
    })
}

/// Trace the characteristic of B through a point of the inflow circle.
pub fn trace_characteristic(
    field: &dyn FieldEval,
    outer_radius: f64,
    start_angle: f64,
    direction: TraceDirection,
) -> MhsResult<TracePath> {
    let start = [start_angle.cos(), start_angle.sin()];
    trace_from(field, outer_radius, start, direction, true)
}

/// Backward-traced footpoint data for every grid node: the angle theta* where
/// the characteristic through the node meets the inflow circle, and the flow
/// parameter s >= 0 consumed to get there.
#[derive(Debug, Clone)]
pub struct FootpointMap {
    pub grid: TensorGrid2D,
    pub theta_star: RMat,
    pub arrival: RMat,
}

pub fn footpoints(field: &dyn FieldEval, grid: &TensorGrid2D) -> MhsResult<FootpointMap> {
    let n_r = grid.n_r;
    let n_phi = grid.n_phi;
    let rows: Vec<MhsResult<Vec<(f64, f64)>>> = (0..n_r)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::with_capacity(n_phi);
            for j in 0..n_phi {
                if i == 0 {
                    row.push((grid.phi[j], 0.0));
                    continue;
                }
                let p = grid.node_point(i, j);
                let path =
                    trace_from(field, grid.outer_radius, p, TraceDirection::Backward, false)?;
                row.push((path.exit_angle(), path.exit_param));
            }
            Ok(row)
        })
        .collect();
    let mut theta_star = RMat::zeros(n_r, n_phi);
    let mut arrival = RMat::zeros(n_r, n_phi);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, (t, s)) in row?.into_iter().enumerate() {
            *theta_star.at_mut(i, j) = t;
            *arrival.at_mut(i, j) = s;
        }
    }
    Ok(FootpointMap {
        grid: grid.clone(),
        theta_star,
        arrival,
    })
}

/// Scalar current on the grid, constant along characteristics.
#[derive(Debug, Clone)]
pub struct CurrentScalar2D {
    pub grid: TensorGrid2D,
    pub values: RMat,
}

impl CurrentScalar2D {
    pub fn zeros(grid: &TensorGrid2D) -> Self {
        Self {
            grid: grid.clone(),
            values: RMat::zeros(grid.n_r, grid.n_phi),
        }
    }
}

/// j(x) = j0(theta*(x)): evaluate the boundary Fourier series at footpoint
/// angles — no grid interpolation beyond the series truncation.
pub fn transport_scalar(j0: &BoundaryFourier, fp: &FootpointMap) -> CurrentScalar2D {
    let mut values = RMat::zeros(fp.grid.n_r, fp.grid.n_phi);
    for i in 0..fp.grid.n_r {
        for j in 0..fp.grid.n_phi {
            *values.at_mut(i, j) = j0.eval(fp.theta_star.at(i, j));
        }
    }
    CurrentScalar2D {
        grid: fp.grid.clone(),
        values,
    }
}

/// Flow-map Jacobian constancy check: along forward characteristics from the
/// inflow circle, J(s) = det[dx(s), B(Phi(s))] (dx the variational state
/// seeded with the boundary tangent) must stay equal to its initial value
/// B(omega)·n(omega). Returns the max deviation over sampled characteristics.
pub fn flow_jacobian_check(field: &dyn FieldEval, fp: &FootpointMap) -> MhsResult<f64> {
    let n_samples = fp.grid.n_phi.min(100);
    let outer = fp.grid.outer_radius;
    let devs: Vec<MhsResult<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|jj| {
            let omega = 2.0 * std::f64::consts::PI * jj as f64 / n_samples as f64;
            let (c, s) = (omega.cos(), omega.sin());
            let b0 = field.eval([c, s]);
            // J(0) = det[e_theta, B] = B·n with n the outward normal -e_r
            let j_init = -(b0[0] * c + b0[1] * s);
            let rhs = |_s: f64, y: &[f64]| {
                let b = field.eval([y[0], y[1]]);
                let g = field.grad([y[0], y[1]]);
                vec![
                    b[0],
                    b[1],
                    g[0][0] * y[2] + g[0][1] * y[3],
                    g[1][0] * y[2] + g[1][1] * y[3],
                ]
            };
            let det_dev = |y: &[f64]| {
                let b = field.eval([y[0], y[1]]);
                (y[2] * b[1] - y[3] * b[0] - j_init).abs()
            };
            let mut worst = 0.0f64;
            let y0 = [c, s, -s, c];
            let opts = OdeOpts::default();
            let stop = |_s: f64, y: &[f64]| {
                worst = worst.max(det_dev(y));
                (y[0] * y[0] + y[1] * y[1]).sqrt() >= outer
            };
            integrate_until(&rhs, 0.0, &y0, &opts, stop).map_err(MhsError::Transport)?;
            Ok(worst)
        })
        .collect();
    let mut max = 0.0f64;
    for d in devs {
        max = max.max(d?);
    }
    Ok(max)
}
