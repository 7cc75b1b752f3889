//! Spherical-shell machinery around the monopole B0 = x/|x|^3, entirely in
//! spherical-harmonic coefficient space: surface Hodge split, the surface
//! elliptic equation, monopole transport, per-(l,m) radial div-curl BVPs,
//! the closed-form multipliers, and a single linearized Grad-Rubin sweep.
//!
//! Orientation constants (documented once, tested on the l=1 triad): the
//! outward normal on the inner sphere is -e_r, so with Psi_lm = grad_S Y_lm
//! and Phi_lm = e_r x grad_S Y_lm,
//!   n x Psi = -Phi,   n x Phi = +Psi,
//! which gives  jrho_lm = -l(l+1) g^Phi_lm  and  j^(2)_lm = -psi_lm.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{MhsError, MhsResult};
use crate::num::dmatrix::DiffMatrix;

/// Spherical-harmonic coefficients c_lm, 0 <= l <= l_max, |m| <= l,
/// orthonormal Y_lm normalization, packed by idx = l^2 + (l + m).
#[derive(Debug, Clone)]
pub struct BoundarySH {
    pub l_max: usize,
    coeffs: Vec<Complex64>,
}

impl BoundarySH {
    pub fn zeros(l_max: usize) -> Self {
        Self {
            l_max,
            coeffs: vec![Complex64::ZERO; (l_max + 1) * (l_max + 1)],
        }
    }

    pub fn from_entries(l_max: usize, entries: &[(usize, i64, Complex64)]) -> Self {
        let mut out = Self::zeros(l_max);
        for &(l, m, c) in entries {
            out.set(l, m, c);
        }
        out
    }

    #[inline]
    fn idx(&self, l: usize, m: i64) -> usize {
        debug_assert!(l <= self.l_max && m.unsigned_abs() as usize <= l);
        l * l + (l as i64 + m) as usize
    }

    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        if l > self.l_max || m.unsigned_abs() as usize > l {
            Complex64::ZERO
        } else {
            self.coeffs[self.idx(l, m)]
        }
    }

    pub fn set(&mut self, l: usize, m: i64, c: Complex64) {
        let i = self.idx(l, m);
        self.coeffs[i] = c;
    }

    pub fn modes(&self) -> impl Iterator<Item = (usize, i64, Complex64)> + '_ {
        (0..=self.l_max).flat_map(move |l| {
            (-(l as i64)..=(l as i64)).map(move |m| (l, m, self.get(l, m)))
        })
    }

    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest violation of c_{l,-m} = (-1)^m conj(c_{lm}).
    pub fn reality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (l, m, c) in self.modes() {
            if m < 0 {
                continue;
            }
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            worst = worst.max((self.get(l, -m) - c.conj() * sign).norm());
        }
        worst
    }
}

/// Tangential field on a sphere as its Psi-part (gradient type) and Phi-part
/// (curl type) coefficients.
#[derive(Debug, Clone)]
pub struct TangentSH {
    pub psi_part: BoundarySH,
    pub phi_part: BoundarySH,
}

impl TangentSH {
    pub fn zeros(l_max: usize) -> Self {
        Self {
            psi_part: BoundarySH::zeros(l_max),
            phi_part: BoundarySH::zeros(l_max),
        }
    }
}

/// Hodge split u = n x grad psi + grad phi of a tangential field on the
/// inner sphere (n = -e_r): phi_lm = Psi-part, psi_lm = -Phi-part.
pub fn surface_hodge(u: &TangentSH) -> MhsResult<(BoundarySH, BoundarySH)> {
    if u.psi_part.get(0, 0).norm() > 0.0 || u.phi_part.get(0, 0).norm() > 0.0 {
        return Err(MhsError::Config(
            "tangential field carries l=0 content".into(),
        ));
    }
    let l_max = u.psi_part.l_max;
    let mut psi = BoundarySH::zeros(l_max);
    let mut phi = BoundarySH::zeros(l_max);
    for (l, m, c) in u.psi_part.modes() {
        phi.set(l, m, c);
    }
    for (l, m, c) in u.phi_part.modes() {
        psi.set(l, m, -c);
    }
    Ok((psi, phi))
}

/// jrho = div_S(n x g) on the inner sphere: the Psi-part of g is killed,
/// the Phi-part maps to -l(l+1) times the Y coefficient.
pub fn jrho_from_g(g: &TangentSH) -> BoundarySH {
    let mut out = BoundarySH::zeros(g.phi_part.l_max);
    for (l, m, c) in g.phi_part.modes() {
        if l >= 1 {
            out.set(l, m, -((l * (l + 1)) as f64) * c);
        }
    }
    out
}

/// Surface elliptic equation for the monopole background (Brho = 1,
/// dBrho/drho = -2, all Lie terms vanish): phi_lm = 2 jrho_lm / (l(l+1)).
pub fn solve_surface_elliptic(_psi: &BoundarySH, jrho: &BoundarySH) -> MhsResult<BoundarySH> {
    if jrho.get(0, 0).norm() > 0.0 {
        return Err(MhsError::Config(
            "jrho carries l=0 content, violating the flux compatibility".into(),
        ));
    }
    let mut phi = BoundarySH::zeros(jrho.l_max);
    for (l, m, c) in jrho.modes() {
        if l >= 1 {
            phi.set(l, m, c * 2.0 / ((l * (l + 1)) as f64));
        }
    }
    Ok(phi)
}

/// Boundary current in VSH coefficient form: radial (Y) part and the two
/// tangential parts.
#[derive(Debug, Clone)]
pub struct CurrentModes3D {
    pub jr: BoundarySH,
    pub j1: BoundarySH,
    pub j2: BoundarySH,
}

/// One transported mode: radial laws j^r(r) = jr r^-2, j^(2)(r) = j2 r.
#[derive(Debug, Clone)]
pub struct TransportedMode {
    pub l: usize,
    pub m: i64,
    pub jr_profile: Vec<Complex64>,
    pub j2_profile: Vec<Complex64>,
}

/// Monopole transport of a boundary current: Y-part scales as r^-2, the
/// tangential parts as r; a nonzero Psi-part (j^(1)) for l >= 1 violates
/// the divergence-free constraint and is rejected, as is radial l=0 content.
pub fn transport_monopole(j0: &CurrentModes3D, r: &[f64]) -> MhsResult<Vec<TransportedMode>> {
    if j0.jr.get(0, 0).norm() > 0.0 {
        return Err(MhsError::Config("j^r_00 must vanish".into()));
    }
    for (l, _, c) in j0.j1.modes() {
        if l >= 1 && c.norm() > 0.0 {
            return Err(MhsError::Config(format!(
                "nonzero j^(1) content at l={l}: transported current would not be divergence-free"
            )));
        }
    }
    let mut out = Vec::new();
    for (l, m, jr) in j0.jr.modes() {
        let j2 = j0.j2.get(l, m);
        if l == 0 || (jr.norm() == 0.0 && j2.norm() == 0.0) {
            continue;
        }
        out.push(TransportedMode {
            l,
            m,
            jr_profile: r.iter().map(|&rv| jr / (rv * rv)).collect(),
            j2_profile: r.iter().map(|&rv| j2 * rv).collect(),
        });
    }
    Ok(out)
}

/// Radial profiles of one (l,m) mode of the div-curl solution.
#[derive(Debug, Clone)]
pub struct VSHModeProfile {
    pub l: usize,
    pub m: i64,
    pub r: Vec<f64>,
    pub b_r: Vec<Complex64>,
    pub b1: Vec<Complex64>,
    pub b2: Vec<Complex64>,
}

impl VSHModeProfile {
    /// Max defect of the discrete divergence identity
    /// (r^2 b^r)' = l(l+1) r b^(1), interior rows.
    pub fn divergence_defect(&self) -> f64 {
        let n = self.r.len();
        let d = DiffMatrix::new(n, self.r[1] - self.r[0]);
        let r2br: Vec<Complex64> = (0..n)
            .map(|i| self.b_r[i] * self.r[i] * self.r[i])
            .collect();
        let lhs = d.apply_c(&r2br);
        let ll1 = (self.l * (self.l + 1)) as f64;
        let mut worst = 0.0f64;
        for i in 2..n.saturating_sub(2) {
            worst = worst.max((lhs[i] - self.b1[i] * ll1 * self.r[i]).norm());
        }
        worst
    }
}

/// Solve the per-mode radial div-curl system for constant coefficients
/// (jr, j2) of the boundary current: the Euler-Cauchy BVP
///   r^2 b'' + 4 r b' + (2 - l(l+1)) b = l(l+1) j2 r^2,   b(1) = b(L) = 0,
/// then b^(1) from the divergence identity and b^(2) = -jr / (l(l+1) r).
pub fn solve_radial_bvp(
    l: usize,
    jr: Complex64,
    j2: Complex64,
    outer_radius: f64,
    n_r: usize,
) -> MhsResult<VSHModeProfile> {
    if l < 1 {
        return Err(MhsError::Config("radial BVP requires l >= 1".into()));
    }
    let h = (outer_radius - 1.0) / (n_r - 1) as f64;
    let r: Vec<f64> = (0..n_r).map(|i| 1.0 + i as f64 * h).collect();
    let ll1 = (l * (l + 1)) as f64;
    let d = DiffMatrix::new(n_r, h);
    let dd = d.dense();
    let d2 = dd.matmul(&dd);
    // solve on the interior nodes only so the Dirichlet endpoints are
    // exactly zero
    let ni = n_r - 2;
    let mut op = crate::num::dense::RMat::zeros(ni, ni);
    for i in 0..ni {
        for j in 0..ni {
            *op.at_mut(i, j) = r[i + 1] * r[i + 1] * d2.at(i + 1, j + 1)
                + 4.0 * r[i + 1] * dd.at(i + 1, j + 1);
        }
        *op.at_mut(i, i) += 2.0 - ll1;
    }
    let lu = op.to_complex().lu()?;
    let rhs: Vec<Complex64> = (0..ni)
        .map(|i| j2 * (ll1 * r[i + 1] * r[i + 1]))
        .collect();
    let inner = lu.solve(&rhs);
    let mut b_r = vec![Complex64::ZERO; n_r];
    b_r[1..(n_r - 1)].copy_from_slice(&inner);
    // divergence identity: b^(1) = (r^2 b^r)' / (l(l+1) r)
    let r2br: Vec<Complex64> = (0..n_r).map(|i| b_r[i] * r[i] * r[i]).collect();
    let der = d.apply_c(&r2br);
    let b1: Vec<Complex64> = (0..n_r).map(|i| der[i] / (ll1 * r[i])).collect();
    let b2: Vec<Complex64> = r.iter().map(|&rv| -jr / (ll1 * rv)).collect();
    Ok(VSHModeProfile {
        l,
        m: 0,
        r,
        b_r,
        b1,
        b2,
    })
}

/// Closed-form b^r(r) per unit j^(2) (the paper's Euler-Cauchy solution with
/// b^r(1) = b^r(L) = 0); the l = 3 branch carries the r^2 ln r particular
/// solution.
pub fn closed_form_br(l: usize, outer_radius: f64, r: f64) -> f64 {
    let a = outer_radius;
    let ll1 = (l * (l + 1)) as f64;
    if l == 3 {
        let d = a * a * a.ln() / (a.powi(-5) - a * a);
        return (12.0 / 7.0) * (d * r * r - d * r.powi(-5) + r * r * r.ln());
    }
    let lf = l as f64;
    let den = a.powf(-2.0 - lf) - a.powf(lf - 1.0);
    let c1 = (a * a - a.powf(-2.0 - lf)) / den;
    let c2 = (a.powf(lf - 1.0) - a * a) / den;
    (ll1 / (12.0 - ll1)) * (c1 * r.powf(lf - 1.0) + c2 * r.powf(-2.0 - lf) + r * r)
}

/// Closed-form diagonal multiplier b^(1)(1) per unit j^(2): the value whose
/// nonvanishing makes A[B0] invertible on the shell.
pub fn multiplier3d(l: usize, outer_radius: f64) -> f64 {
    let a = outer_radius;
    if l == 3 {
        let d = a * a * a.ln() / (a.powi(-5) - a * a);
        return (7.0 * d + 1.0) / 7.0;
    }
    let lf = l as f64;
    let ll1 = lf * (lf + 1.0);
    let den = a.powf(-2.0 - lf) - a.powf(lf - 1.0);
    let c1 = (a * a - a.powf(-2.0 - lf)) / den;
    let c2 = (a.powf(lf - 1.0) - a * a) / den;
    ((lf + 1.0) * c1 - lf * c2 + 4.0) / (12.0 - ll1)
}

/// Per-mode diagnostics of a linearized sweep.
#[derive(Debug, Clone)]
pub struct SweepMode {
    pub l: usize,
    pub m: i64,
    /// Hodge potential of g feeding the A-operator path
    pub psi: Complex64,
    /// surface elliptic potential (reported; its Psi-type current is barred
    /// from transport by the divergence-free constraint)
    pub surface_phi: Complex64,
    pub jrho: Complex64,
    pub j2: Complex64,
    /// achieved tangential trace of W + H at r = 1
    pub trace_psi: Complex64,
    pub trace_phi: Complex64,
    /// residual of the mode-wise current equation m_l (-psi) = g_psi - h(1)
    pub equation_residual: Complex64,
    /// discrete b^(1)(1)/j^(2) against the closed form
    pub multiplier_fd: f64,
    pub multiplier_closed: f64,
    pub profile: Option<VSHModeProfile>,
}

pub struct SweepReport {
    pub modes: Vec<SweepMode>,
    /// max |achieved trace - g| over both tangential parts and all modes
    pub trace_residual: f64,
    pub max_divergence_defect: f64,
}

/// Boundary data for the shell: normal-trace perturbations on both spheres
/// (outward normal) and the tangential data on the inflow sphere.
pub struct ShellData {
    pub f_in: BoundarySH,
    pub f_out: BoundarySH,
    pub g: TangentSH,
}

/// One application of the linearized Grad-Rubin map around the monopole:
/// the boundary current is read off g (psi from the Hodge split, jrho from
/// div_S(n x g), phi from the surface elliptic equation), transported, and
/// pushed through the per-mode radial BVPs; the report carries the achieved
/// tangential traces and the residual of the mode-wise current equation in
/// terms of the closed multipliers.
pub fn linear_sweep3d(
    data: &ShellData,
    outer_radius: f64,
    l_max: usize,
    n_r: usize,
) -> MhsResult<SweepReport> {
    let a = outer_radius;
    // l = 0 flux compatibility of the harmonic part
    let f0 = data.f_in.get(0, 0);
    if (data.f_out.get(0, 0) + f0 / (a * a)).norm() > 1e-12 * (1.0 + f0.norm()) {
        return Err(MhsError::Config(
            "l=0 fluxes through the two spheres do not balance".into(),
        ));
    }
    let (psi_g, _phi_g) = surface_hodge(&data.g)?;
    let jrho = jrho_from_g(&data.g);
    let surface_phi = solve_surface_elliptic(&psi_g, &jrho)?;
    let mode_list: Vec<(usize, i64)> = (1..=l_max)
        .flat_map(|l| (-(l as i64)..=(l as i64)).map(move |m| (l, m)))
        .collect();
    let modes: Vec<MhsResult<SweepMode>> = mode_list
        .into_par_iter()
        .map(|(l, m)| {
            let lf = l as f64;
            // harmonic part H = grad h, h = alpha r^l + beta r^(-l-1):
            // -h'(1) = f_in, h'(L) = f_out; Psi trace coefficient is h(1)
            let (fi, fo) = (data.f_in.get(l, m), data.f_out.get(l, m));
            let det = -lf * (lf + 1.0) * a.powf(-lf - 2.0) + (lf + 1.0) * lf * a.powf(lf - 1.0);
            let (alpha, beta) = (
                (-fi * (lf + 1.0) * a.powf(-lf - 2.0) + fo * (lf + 1.0)) / det,
                (fi * lf * a.powf(lf - 1.0) + fo * lf) / det,
            );
            let h_trace = alpha + beta;
            let m_closed = multiplier3d(l, a);
            let g_psi = data.g.psi_part.get(l, m);
            let psi = psi_g.get(l, m);
            let j2 = -psi;
            let jr = jrho.get(l, m);
            let (profile, trace_psi, trace_phi, m_fd) = if jr.norm() > 0.0 || j2.norm() > 0.0 {
                let prof = solve_radial_bvp(l, jr, j2, a, n_r)?;
                let tp = prof.b1[0] + h_trace;
                let tf = prof.b2[0];
                let m_fd = if j2.norm() > 0.0 {
                    (prof.b1[0] / j2).re
                } else {
                    m_closed
                };
                (Some(prof), tp, tf, m_fd)
            } else {
                (None, h_trace, Complex64::ZERO, m_closed)
            };
            Ok(SweepMode {
                l,
                m,
                psi,
                surface_phi: surface_phi.get(l, m),
                jrho: jr,
                j2,
                trace_psi,
                trace_phi,
                equation_residual: j2 * m_closed - (g_psi - h_trace),
                multiplier_fd: m_fd,
                multiplier_closed: m_closed,
                profile,
            })
        })
        .collect();
    let mut out = Vec::new();
    let mut trace_residual = 0.0f64;
    let mut max_defect = 0.0f64;
    for m in modes {
        let m = m?;
        trace_residual = trace_residual
            .max((m.trace_psi - data.g.psi_part.get(m.l, m.m)).norm())
            .max((m.trace_phi - data.g.phi_part.get(m.l, m.m)).norm());
        if let Some(p) = &m.profile {
            max_defect = max_defect.max(p.divergence_defect());
        }
        out.push(m);
    }
    Ok(SweepReport {
        modes: out,
        trace_residual,
        max_divergence_defect: max_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::legendre::legendre_norm_dtheta;
    use crate::num::quad::gauss_legendre;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hodge_basis_alignment_and_roundtrip() {
        let mut u = TangentSH::zeros(4);
        u.psi_part.set(1, 0, c(1.0));
        let (psi, phi) = surface_hodge(&u).unwrap();
        assert_eq!(phi.get(1, 0), c(1.0));
        assert!(psi.norm_inf() == 0.0);

        let mut u = TangentSH::zeros(4);
        u.phi_part.set(2, 1, c(0.7));
        let (psi, phi) = surface_hodge(&u).unwrap();
        assert_eq!(psi.get(2, 1), c(-0.7));
        assert!(phi.norm_inf() == 0.0);

        // mixed input reassembles: Psi-part <- phi, Phi-part <- -psi
        let mut u = TangentSH::zeros(3);
        u.psi_part.set(2, -1, Complex64::new(0.3, -0.2));
        u.phi_part.set(3, 2, Complex64::new(-0.1, 0.4));
        let (psi, phi) = surface_hodge(&u).unwrap();
        for (l, m, v) in u.psi_part.modes() {
            assert!((phi.get(l, m) - v).norm() < 1e-12);
        }
        for (l, m, v) in u.phi_part.modes() {
            assert!((psi.get(l, m) + v).norm() < 1e-12);
        }
        let mut bad = TangentSH::zeros(2);
        bad.psi_part.set(0, 0, c(1.0));
        assert!(surface_hodge(&bad).is_err());
    }

    #[test]
    fn jrho_quadrature_oracle() {
        // pure Psi input -> zero
        let mut g = TangentSH::zeros(4);
        g.psi_part.set(2, 0, c(1.0));
        assert!(jrho_from_g(&g).norm_inf() == 0.0);
        // pure Phi at (2,0): coefficient -l(l+1); the magnitude l(l+1) is
        // the quadrature value of int |grad_S Y_20|^2 dS
        let mut g = TangentSH::zeros(4);
        g.phi_part.set(2, 0, c(1.0));
        let j = jrho_from_g(&g);
        let (x, w) = gauss_legendre(64);
        let mut quad = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            let dth = legendre_norm_dtheta(2, 0, xi.acos());
            quad += wi * dth * dth;
        }
        quad *= 2.0 * std::f64::consts::PI;
        assert!((quad - 6.0).abs() < 1e-10, "quad = {quad}");
        assert!((j.get(2, 0) + c(quad)).norm() < 1e-9);
    }

    #[test]
    fn surface_elliptic_mode_algebra() {
        let jrho = BoundarySH::from_entries(4, &[(2, 0, c(1.0))]);
        let phi = solve_surface_elliptic(&BoundarySH::zeros(4), &jrho).unwrap();
        assert!((phi.get(2, 0) - c(1.0 / 3.0)).norm() < 1e-15);
        // psi never sources phi on the monopole
        let psi = BoundarySH::from_entries(4, &[(3, 1, c(5.0))]);
        let phi = solve_surface_elliptic(&psi, &BoundarySH::zeros(4)).unwrap();
        assert!(phi.norm_inf() == 0.0);
        let bad = BoundarySH::from_entries(2, &[(0, 0, c(1.0))]);
        assert!(solve_surface_elliptic(&BoundarySH::zeros(2), &bad).is_err());
    }

    #[test]
    fn transport_scalings_and_rejections() {
        let r: Vec<f64> = (0..5).map(|i| 1.0 + 0.25 * i as f64).collect();
        let j0 = CurrentModes3D {
            jr: BoundarySH::from_entries(3, &[(2, 1, c(1.0))]),
            j1: BoundarySH::zeros(3),
            j2: BoundarySH::from_entries(3, &[(2, 1, c(3.0))]),
        };
        let t = transport_monopole(&j0, &r).unwrap();
        assert_eq!(t.len(), 1);
        assert!((t[0].jr_profile[4] - c(1.0 / 4.0)).norm() < 1e-15);
        assert!((t[0].j2_profile[4] - c(6.0)).norm() < 1e-15);

        let bad = CurrentModes3D {
            jr: BoundarySH::zeros(3),
            j1: BoundarySH::from_entries(3, &[(1, 0, c(1.0))]),
            j2: BoundarySH::zeros(3),
        };
        assert!(transport_monopole(&bad, &r).is_err());
        let bad = CurrentModes3D {
            jr: BoundarySH::from_entries(3, &[(0, 0, c(1.0))]),
            j1: BoundarySH::zeros(3),
            j2: BoundarySH::zeros(3),
        };
        assert!(transport_monopole(&bad, &r).is_err());
    }

    #[test]
    fn radial_bvp_matches_closed_form() {
        for l in [1usize, 2, 3, 5] {
            let prof = solve_radial_bvp(l, Complex64::ZERO, c(1.0), 2.0, 512).unwrap();
            assert!(prof.b_r[0].norm() < 1e-12 && prof.b_r[511].norm() < 1e-12);
            let mut worst = 0.0f64;
            let mut scale = 0.0f64;
            for (i, &rv) in prof.r.iter().enumerate() {
                let want = closed_form_br(l, 2.0, rv);
                worst = worst.max((prof.b_r[i].re - want).abs());
                scale = scale.max(want.abs());
            }
            assert!(worst / scale < 1e-6, "l={l}: rel err {}", worst / scale);
            assert!(prof.divergence_defect() < 1e-10);
        }
        let zero = solve_radial_bvp(4, Complex64::ZERO, Complex64::ZERO, 2.0, 64).unwrap();
        assert!(zero.b_r.iter().all(|v| v.norm() < 1e-14));
        assert!(solve_radial_bvp(0, c(1.0), c(1.0), 2.0, 64).is_err());
    }

    #[test]
    fn multiplier_matches_fd_and_never_vanishes() {
        for l in [1usize, 2, 3, 4, 8] {
            for &a in &[1.5, 2.0, 5.0] {
                // comparable step size across domain widths
                let n_r = if a > 2.0 { 1024 } else { 512 };
                let prof = solve_radial_bvp(l, Complex64::ZERO, c(1.0), a, n_r).unwrap();
                let want = multiplier3d(l, a);
                let got = prof.b1[0].re;
                assert!(
                    ((got - want) / want).abs() < 1e-6,
                    "l={l}, a={a}: {got} vs {want}"
                );
            }
        }
        for l in 1..=32usize {
            for &a in &[1.1, 2.0, 5.0, 10.0] {
                assert!(multiplier3d(l, a).abs() > 1e-6, "l={l}, L={a}");
            }
        }
    }

    #[test]
    fn sweep_zero_data_and_single_mode() {
        let l_max = 4;
        let data = ShellData {
            f_in: BoundarySH::zeros(l_max),
            f_out: BoundarySH::zeros(l_max),
            g: TangentSH::zeros(l_max),
        };
        let rep = linear_sweep3d(&data, 2.0, l_max, 128).unwrap();
        assert!(rep.trace_residual < 1e-14);
        assert!(rep.modes.iter().all(|m| m.profile.is_none()));

        // single Phi_{2,0} mode: the Phi trace is reproduced exactly and the
        // discrete multiplier matches the closed form
        let mut data = ShellData {
            f_in: BoundarySH::zeros(l_max),
            f_out: BoundarySH::zeros(l_max),
            g: TangentSH::zeros(l_max),
        };
        data.g.phi_part.set(2, 0, c(1e-3));
        let rep = linear_sweep3d(&data, 2.0, l_max, 512).unwrap();
        let m20 = rep
            .modes
            .iter()
            .find(|m| m.l == 2 && m.m == 0)
            .unwrap();
        // Phi trace reproduced exactly; Psi trace / input is the multiplier
        assert!((m20.trace_phi - c(1e-3)).norm() < 1e-15);
        let ratio = (m20.trace_psi / c(1e-3)).re;
        assert!(
            ((ratio - m20.multiplier_closed) / m20.multiplier_closed).abs() < 1e-6,
            "ratio {ratio} vs {}",
            m20.multiplier_closed
        );
        assert!(
            ((m20.multiplier_fd - m20.multiplier_closed) / m20.multiplier_closed).abs() < 1e-6
        );
        assert!((m20.jrho + c(6e-3)).norm() < 1e-15);
        assert!((m20.surface_phi + c(2e-3)).norm() < 1e-15);
        assert!((m20.j2 - c(1e-3)).norm() < 1e-15);
    }

    #[test]
    fn sweep_harmonic_only_response() {
        // f on Y_{1,0} with balanced outer flux, g = 0: no current anywhere
        let l_max = 3;
        let mut data = ShellData {
            f_in: BoundarySH::zeros(l_max),
            f_out: BoundarySH::zeros(l_max),
            g: TangentSH::zeros(l_max),
        };
        data.f_in.set(1, 0, c(1e-3));
        let rep = linear_sweep3d(&data, 2.0, l_max, 128).unwrap();
        for m in &rep.modes {
            // zero g means zero current: the response is the potential field
            assert!(m.profile.is_none());
            assert!(m.jrho.norm() == 0.0 && m.j2.norm() == 0.0);
            if !(m.l == 1 && m.m == 0) {
                assert!(m.trace_psi.norm() < 1e-15);
            }
        }
        // the (1,0) tangential mismatch is reported as the equation residual
        let m10 = rep.modes.iter().find(|m| m.l == 1 && m.m == 0).unwrap();
        assert!((m10.equation_residual - m10.trace_psi).norm() < 1e-15);
        assert!(m10.trace_psi.norm() > 1e-5);
        // unbalanced l=0 flux is rejected
        let mut bad = ShellData {
            f_in: BoundarySH::zeros(l_max),
            f_out: BoundarySH::zeros(l_max),
            g: TangentSH::zeros(l_max),
        };
        bad.f_in.set(0, 0, c(1.0));
        assert!(linear_sweep3d(&bad, 2.0, l_max, 64).is_err());
    }
}
