//! Domains (annulus, spherical shell, near-annular map images), normals,
//! metrics, and tensor-product grids.

use crate::error::{MhsError, MhsResult};

/// Annulus 1 < |x| < L. The inner radius is normalized to 1; general inner
/// radii are obtained by user-side rescaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusSpec {
    pub outer_radius: f64,
}

impl AnnulusSpec {
    pub fn new(outer_radius: f64) -> MhsResult<Self> {
        if !(outer_radius > 1.0) || !outer_radius.is_finite() {
            return Err(MhsError::Config(format!(
                "annulus outer radius must be finite and > 1, got {outer_radius}"
            )));
        }
        Ok(Self { outer_radius })
    }
}

/// Spherical shell 1 < |x| < L.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellSpec {
    pub outer_radius: f64,
}

impl ShellSpec {
    pub fn new(outer_radius: f64) -> MhsResult<Self> {
        if !(outer_radius > 1.0) || !outer_radius.is_finite() {
            return Err(MhsError::Config(format!(
                "shell outer radius must be finite and > 1, got {outer_radius}"
            )));
        }
        Ok(Self { outer_radius })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryId {
    Inner,
    Outer,
}

/// Orientation-preserving diffeomorphism of the reference annulus, from the
/// built-in radial-bump family
///
///   gamma(r, theta) = (r + eps * s(r) * c(theta)) * e_r(theta + rotation),
///
/// with s a quintic cutoff equal to 1 at r=1 and 0 at r=L, and c a real
/// trigonometric polynomial. eps = 0 reduces to a rigid rotation (identity
/// for rotation = 0). The inverse is computed per ray by Newton iteration.
#[derive(Debug, Clone)]
pub struct DiffeoMap {
    pub outer_radius: f64,
    pub eps: f64,
    pub rotation: f64,
    /// c(theta) = sum_k cos_coeffs[k-1] cos(k theta) + sin_coeffs[k-1] sin(k theta)
    pub cos_coeffs: Vec<f64>,
    pub sin_coeffs: Vec<f64>,
}

impl DiffeoMap {
    pub fn identity(outer_radius: f64) -> Self {
        Self {
            outer_radius,
            eps: 0.0,
            rotation: 0.0,
            cos_coeffs: vec![],
            sin_coeffs: vec![],
        }
    }

    pub fn rotation(outer_radius: f64, angle: f64) -> Self {
        Self {
            rotation: angle,
            ..Self::identity(outer_radius)
        }
    }

    /// The default bump family used by the mapped-domain experiments.
    pub fn radial_bump(outer_radius: f64, eps: f64) -> Self {
        Self {
            outer_radius,
            eps,
            rotation: 0.0,
            cos_coeffs: vec![1.0],
            sin_coeffs: vec![0.0, 0.3],
        }
    }

    pub fn is_isometry(&self) -> bool {
        self.eps == 0.0
    }

    pub fn c(&self, theta: f64) -> f64 {
        let mut v = 0.0;
        for (k, &a) in self.cos_coeffs.iter().enumerate() {
            v += a * ((k + 1) as f64 * theta).cos();
        }
        for (k, &b) in self.sin_coeffs.iter().enumerate() {
            v += b * ((k + 1) as f64 * theta).sin();
        }
        v
    }

    pub fn c_prime(&self, theta: f64) -> f64 {
        let mut v = 0.0;
        for (k, &a) in self.cos_coeffs.iter().enumerate() {
            let kf = (k + 1) as f64;
            v -= a * kf * (kf * theta).sin();
        }
        for (k, &b) in self.sin_coeffs.iter().enumerate() {
            let kf = (k + 1) as f64;
            v += b * kf * (kf * theta).cos();
        }
        v
    }

    /// Quintic cutoff: 1 at r=1, 0 at r=L, first two derivatives vanish at
    /// both ends.
    pub fn cutoff(&self, r: f64) -> f64 {
        let t = ((self.outer_radius - r) / (self.outer_radius - 1.0)).clamp(0.0, 1.0);
        t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }

    pub fn cutoff_prime(&self, r: f64) -> f64 {
        let span = self.outer_radius - 1.0;
        let t = ((self.outer_radius - r) / span).clamp(0.0, 1.0);
        30.0 * t * t * (1.0 - t) * (1.0 - t) * (-1.0 / span)
    }

    /// Mapped radius R(r, theta) and its partials.
    pub fn radius(&self, r: f64, theta: f64) -> f64 {
        r + self.eps * self.cutoff(r) * self.c(theta)
    }

    pub fn radius_dr(&self, r: f64, theta: f64) -> f64 {
        1.0 + self.eps * self.cutoff_prime(r) * self.c(theta)
    }

    pub fn radius_dtheta(&self, r: f64, theta: f64) -> f64 {
        self.eps * self.cutoff(r) * self.c_prime(theta)
    }

    /// Forward map on Cartesian points of the reference annulus.
    pub fn forward(&self, p: [f64; 2]) -> [f64; 2] {
        let (r, theta) = to_polar(p);
        let rr = self.radius(r, theta);
        let a = theta + self.rotation;
        [rr * a.cos(), rr * a.sin()]
    }

    /// Inverse map by per-ray Newton iteration (tolerance 1e-12 in radius).
    pub fn inverse(&self, q: [f64; 2]) -> MhsResult<[f64; 2]> {
        let (rho, phi) = to_polar(q);
        let theta = phi - self.rotation;
        let mut r = rho.clamp(1.0, self.outer_radius);
        for _ in 0..100 {
            let f = self.radius(r, theta) - rho;
            let df = self.radius_dr(r, theta);
            if df <= 0.0 {
                return Err(MhsError::Geometry(
                    "radial bump map is not monotone along a ray (orientation violated)".into(),
                ));
            }
            let step = f / df;
            r -= step;
            if step.abs() < 1e-13 {
                return Ok([r * theta.cos(), r * theta.sin()]);
            }
        }
        Err(MhsError::Geometry(
            "Newton inverse of the radial bump map did not converge".into(),
        ))
    }

    /// Cartesian Jacobian matrix d gamma at a reference point.
    pub fn jacobian(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        let (r, theta) = to_polar(p);
        let rr = self.radius(r, theta);
        let rr_r = self.radius_dr(r, theta);
        let rr_t = self.radius_dtheta(r, theta);
        let a = theta + self.rotation;
        let (ca, sa) = (a.cos(), a.sin());
        // columns of d gamma / d(r,theta) in output Cartesian coordinates
        let col_r = [rr_r * ca, rr_r * sa];
        let col_t = [rr_t * ca - rr * sa, rr_t * sa + rr * ca];
        // d(r,theta)/d(x,y) at the reference point
        let (ct, st) = (theta.cos(), theta.sin());
        let drdx = [ct, st];
        let dtdx = [-st / r, ct / r];
        [
            [
                col_r[0] * drdx[0] + col_t[0] * dtdx[0],
                col_r[0] * drdx[1] + col_t[0] * dtdx[1],
            ],
            [
                col_r[1] * drdx[0] + col_t[1] * dtdx[0],
                col_r[1] * drdx[1] + col_t[1] * dtdx[1],
            ],
        ]
    }
}

/// Symmetric 2x2 pullback metric with its inverse and determinant.
#[derive(Debug, Clone, Copy)]
pub struct Metric2 {
    pub g: [[f64; 2]; 2],
    pub g_inv: [[f64; 2]; 2],
    pub det: f64,
}

/// g_ij = <d gamma(e_i), d gamma(e_j)> at a reference point.
pub fn pullback_metric(map: &DiffeoMap, p: [f64; 2]) -> MhsResult<Metric2> {
    let j = map.jacobian(p);
    let det_j = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if det_j <= 0.0 {
        return Err(MhsError::Geometry(format!(
            "map Jacobian determinant {det_j} <= 0 at ({}, {})",
            p[0], p[1]
        )));
    }
    let mut g = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            g[a][b] = j[0][a] * j[0][b] + j[1][a] * j[1][b];
        }
    }
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let g_inv = [
        [g[1][1] / det, -g[0][1] / det],
        [-g[1][0] / det, g[0][0] / det],
    ];
    Ok(Metric2 { g, g_inv, det })
}

/// Outward normal of the domain at a boundary point (annulus reference
/// convention: -e_r on the inner boundary, +e_r on the outer). For mapped
/// domains the reference normal is pushed forward with (d gamma)^{-T} and
/// renormalized.
pub fn outer_normal(map: &DiffeoMap, boundary: BoundaryId, angle: f64) -> [f64; 2] {
    let (r, sign) = match boundary {
        BoundaryId::Inner => (1.0, -1.0),
        BoundaryId::Outer => (map.outer_radius, 1.0),
    };
    let p = [r * angle.cos(), r * angle.sin()];
    let n_ref = [sign * angle.cos(), sign * angle.sin()];
    let j = map.jacobian(p);
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    // (d gamma)^{-T} n
    let inv_t = [
        [j[1][1] / det, -j[1][0] / det],
        [-j[0][1] / det, j[0][0] / det],
    ];
    let mut n = [
        inv_t[0][0] * n_ref[0] + inv_t[0][1] * n_ref[1],
        inv_t[1][0] * n_ref[0] + inv_t[1][1] * n_ref[1],
    ];
    let norm = (n[0] * n[0] + n[1] * n[1]).sqrt();
    n[0] /= norm;
    n[1] /= norm;
    n
}

/// Tensor-product polar grid: uniform radial nodes on [1, L], uniform angles.
#[derive(Debug, Clone)]
pub struct TensorGrid2D {
    pub outer_radius: f64,
    pub n_r: usize,
    pub n_phi: usize,
    /// spectral cutoff the angular resolution was chosen for
    pub k_cut: usize,
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    pub h: f64,
}

impl TensorGrid2D {
    pub fn node_point(&self, i: usize, j: usize) -> [f64; 2] {
        [self.r[i] * self.phi[j].cos(), self.r[i] * self.phi[j].sin()]
    }
}

/// Build a grid with N_phi the next power of two satisfying the anti-aliasing
/// bound N_phi >= 4K+2.
pub fn make_grid(domain: AnnulusSpec, n_r: usize, k_cut: usize) -> MhsResult<TensorGrid2D> {
    if n_r < 16 {
        return Err(MhsError::Config(format!(
            "N_r = {n_r} too small; need at least 16 radial nodes"
        )));
    }
    if k_cut < 1 {
        return Err(MhsError::Config("spectral cutoff K must be >= 1".into()));
    }
    let min_phi = 4 * k_cut + 2;
    let n_phi = min_phi.next_power_of_two();
    let l = domain.outer_radius;
    let h = (l - 1.0) / (n_r - 1) as f64;
    let r = (0..n_r)
        .map(|i| {
            if i == n_r - 1 {
                l
            } else {
                1.0 + i as f64 * h
            }
        })
        .collect();
    let phi = (0..n_phi)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64)
        .collect();
    Ok(TensorGrid2D {
        outer_radius: l,
        n_r,
        n_phi,
        k_cut,
        r,
        phi,
        h,
    })
}

pub fn to_polar(p: [f64; 2]) -> (f64, f64) {
    ((p[0] * p[0] + p[1] * p[1]).sqrt(), p[1].atan2(p[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn annulus_normals() {
        let map = DiffeoMap::identity(2.0);
        let n = outer_normal(&map, BoundaryId::Inner, 0.0);
        assert!((n[0] + 1.0).abs() < 1e-14 && n[1].abs() < 1e-14);
        let n = outer_normal(&map, BoundaryId::Outer, PI / 2.0);
        assert!(n[0].abs() < 1e-14 && (n[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn make_grid_aliasing_rule() {
        let g = make_grid(AnnulusSpec::new(2.0).unwrap(), 64, 16).unwrap();
        assert_eq!(g.n_phi, 128);
        assert_eq!(g.r[0], 1.0);
        assert_eq!(g.r[63], 2.0);
        let g = make_grid(AnnulusSpec::new(std::f64::consts::E).unwrap(), 256, 32).unwrap();
        assert_eq!(g.n_phi, 256);
        assert!(make_grid(AnnulusSpec::new(2.0).unwrap(), 8, 16).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let map = DiffeoMap::radial_bump(2.0, 0.05);
        let eps = 1e-6;
        for &(r, t) in &[(1.0, 0.3), (1.4, 2.0), (1.9, 5.5)] {
            let p = [r * f64::cos(t), r * f64::sin(t)];
            let j = map.jacobian(p);
            for col in 0..2 {
                let mut pp = p;
                let mut pm = p;
                pp[col] += eps;
                pm[col] -= eps;
                let fp = map.forward(pp);
                let fm = map.forward(pm);
                for row in 0..2 {
                    let fd = (fp[row] - fm[row]) / (2.0 * eps);
                    assert!(
                        (fd - j[row][col]).abs() < 1e-8,
                        "entry ({row},{col}) at r={r}, t={t}: fd={fd} vs {}",
                        j[row][col]
                    );
                }
            }
        }
    }

    #[test]
    fn metric_identity_and_rotation_are_euclidean() {
        for map in [DiffeoMap::identity(2.0), DiffeoMap::rotation(2.0, 0.7)] {
            let m = pullback_metric(&map, [1.3, 0.4]).unwrap();
            for a in 0..2 {
                for b in 0..2 {
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((m.g[a][b] - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn metric_matches_fd_oracle_on_bump() {
        let map = DiffeoMap::radial_bump(2.0, 0.05);
        let p = [1.2 * f64::cos(0.9), 1.2 * f64::sin(0.9)];
        let m = pullback_metric(&map, p).unwrap();
        // central-difference oracle on gamma
        let eps = 1e-6;
        let col = |c: usize| -> [f64; 2] {
            let mut pp = p;
            let mut pm = p;
            pp[c] += eps;
            pm[c] -= eps;
            let fp = map.forward(pp);
            let fm = map.forward(pm);
            [(fp[0] - fm[0]) / (2.0 * eps), (fp[1] - fm[1]) / (2.0 * eps)]
        };
        let c0 = col(0);
        let c1 = col(1);
        let g_fd = [
            [c0[0] * c0[0] + c0[1] * c0[1], c0[0] * c1[0] + c0[1] * c1[1]],
            [c1[0] * c0[0] + c1[1] * c0[1], c1[0] * c1[0] + c1[1] * c1[1]],
        ];
        for a in 0..2 {
            for b in 0..2 {
                assert!((m.g[a][b] - g_fd[a][b]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn inverse_roundtrip_on_sample_cloud() {
        let map = DiffeoMap::radial_bump(2.0, 0.1);
        let mut worst = 0.0f64;
        for i in 0..25 {
            for j in 0..40 {
                let r = 1.0 + (i as f64 / 24.0);
                let t = 2.0 * PI * j as f64 / 40.0;
                let p = [r * t.cos(), r * t.sin()];
                let q = map.forward(p);
                let back = map.inverse(q).unwrap();
                worst = worst.max(((back[0] - p[0]).powi(2) + (back[1] - p[1]).powi(2)).sqrt());
            }
        }
        assert!(worst < 1e-10, "roundtrip error {worst}");
    }

    #[test]
    fn bump_normals_tilt_with_the_boundary() {
        // identity-map normals equal annulus normals for any eps=0 rotation
        let map = DiffeoMap::identity(2.0);
        for &a in &[0.0, 1.0, 2.5] {
            let n = outer_normal(&map, BoundaryId::Inner, a);
            assert!((n[0] + a.cos()).abs() < 1e-13 && (n[1] + a.sin()).abs() < 1e-13);
        }
        // unit length + orthogonal to the boundary tangent on the bump map
        let map = DiffeoMap::radial_bump(2.0, 0.1);
        for &a in &[0.2, 1.7, 4.4] {
            let n = outer_normal(&map, BoundaryId::Inner, a);
            assert!(((n[0] * n[0] + n[1] * n[1]).sqrt() - 1.0).abs() < 1e-12);
            // tangent by FD along the boundary parameterization
            let eps = 1e-6;
            let bp = |t: f64| map.forward([t.cos(), t.sin()]);
            let (p1, p2) = (bp(a + eps), bp(a - eps));
            let tan = [(p1[0] - p2[0]) / (2.0 * eps), (p1[1] - p2[1]) / (2.0 * eps)];
            let dot = n[0] * tan[0] + n[1] * tan[1];
            assert!(dot.abs() < 1e-7, "normal-tangent dot {dot}");
        }
    }
}
