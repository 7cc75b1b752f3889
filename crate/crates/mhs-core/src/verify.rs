//! Numerical verification of the analytical claims that admit desk-scale
//! checks: Fourier decay of boundary-kernel models with/without the
//! cancellation condition, principal-symbol asymptotics in 2D and 3D, and
//! field admissibility scans.

use num_complex::Complex64;

use crate::current2d::OperatorMatrix;
use crate::error::{MhsError, MhsResult};
use crate::field::FieldEval;
use crate::num::fft;
use crate::shell3d::multiplier3d;

/// Kernel models: ln(z) on z>0 only (no cancellation), ln|z| (satisfies the
/// cancellation condition), |z|^-p (needs no cancellation condition).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    OneSidedLog,
    SymmetricLog,
    Power(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayModel {
    /// c / |xi|
    OverXi,
    /// c ln|xi| / |xi|
    LogOverXi,
}

/// Fitted Fourier decay of a windowed kernel.
#[derive(Debug, Clone)]
pub struct DecayFit {
    pub xi: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub model: DecayModel,
    /// log-space RMS residual of the winning model
    pub residual: f64,
    /// residual of the losing model; discrimination = alt/residual
    pub alt_residual: f64,
    /// least-squares log-log slope
    pub slope: f64,
    pub inconclusive: bool,
}

impl DecayFit {
    pub fn discrimination(&self) -> f64 {
        self.alt_residual / self.residual
    }
}

fn kernel_value(kind: KernelKind, z: f64) -> f64 {
    match kind {
        KernelKind::OneSidedLog => {
            if z > 0.0 {
                z.ln()
            } else {
                0.0
            }
        }
        KernelKind::SymmetricLog => z.abs().max(1e-300).ln(),
        KernelKind::Power(p) => z.abs().max(1e-300).powf(-p),
    }
}

fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Exact Fourier transform of the piecewise-linear interpolant through the
/// nodes (zs, kv), evaluated at the given frequencies.
fn piecewise_linear_ft(zs: &[f64], kv: &[f64], xi: &[f64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; xi.len()];
    for (s, o) in xi.iter().zip(out.iter_mut()) {
        let x = *s;
        let mut acc = Complex64::ZERO;
        for i in 0..zs.len() - 1 {
            let (a, b) = (zs[i], zs[i + 1]);
            let (ka, kb) = (kv[i], kv[i + 1]);
            let h = b - a;
            let u = x * h;
            let e = Complex64::from_polar(1.0, -x * a);
            let (i0, i1) = if u.abs() < 1e-4 {
                (
                    Complex64::new(1.0 - u * u / 6.0, -u / 2.0) * h,
                    Complex64::new(0.5 - u * u / 8.0, -u / 3.0) * h * h,
                )
            } else {
                let eu = Complex64::from_polar(1.0, -u);
                let ix = Complex64::new(0.0, x);
                (
                    (Complex64::ONE - eu) / ix,
                    (eu * Complex64::new(1.0, u) - Complex64::ONE) / (x * x),
                )
            };
            acc += e * (i0 * ka + i1 * ((kb - ka) / h));
        }
        *o = acc;
    }
    out
}

struct KernelFtParams {
    half_width: f64,
    sigma: f64,
    mask_cells: usize,
    graded_nodes: usize,
    xi_lo: f64,
    xi_hi: f64,
    xi_count: usize,
}

impl Default for KernelFtParams {
    fn default() -> Self {
        Self {
            half_width: 3.3,
            sigma: 0.55,
            mask_cells: 128,
            graded_nodes: 800,
            xi_lo: 1e4,
            xi_hi: 1e6,
            xi_count: 60,
        }
    }
}

/// Compute |FT| of a Gaussian-windowed kernel on a 2^k grid, with the origin
/// neighbourhood masked out of the FFT and restored by an exact
/// piecewise-linear transform on a geometrically graded mesh, then fit the
/// decay models on log-log residuals.
pub fn kernel_ft_decay(kind: KernelKind, n: usize) -> MhsResult<DecayFit> {
    if n < (1 << 16) || !n.is_power_of_two() {
        return Err(MhsError::Config(format!(
            "kernel FT needs a power-of-two sample count >= 65536, got {n}"
        )));
    }
    let p = KernelFtParams::default();
    let dz = 2.0 * p.half_width / n as f64;
    let z_fk = p.mask_cells as f64 * dz;
    let window = |z: f64| (-(z / p.sigma) * (z / p.sigma)).exp();
    // masked, windowed samples, ifftshifted so z=0 sits at index 0
    let mut arr = vec![Complex64::ZERO; n];
    for (i, slot) in arr.iter_mut().enumerate() {
        let z = ((i as i64 + n as i64 / 2) % n as i64 - n as i64 / 2) as f64 * dz;
        if z.abs() < z_fk - dz / 2.0 || z == 0.0 {
            continue;
        }
        *slot = Complex64::new(kernel_value(kind, z) * window(z), 0.0);
    }
    let hat = fft::fft_forward_c(&arr);
    // fft_forward_c scales by 1/n; the continuum transform is dz * sum
    let scale = dz * n as f64;
    let xi_eval = geomspace(p.xi_lo, p.xi_hi, p.xi_count);
    let dxi = 2.0 * std::f64::consts::PI / (n as f64 * dz);
    let mut xb = Vec::with_capacity(p.xi_count);
    let mut fb = Vec::with_capacity(p.xi_count);
    for &x in &xi_eval {
        // snap to the nearest FFT bin, clamped into the resolved band
        let bin = ((x / dxi).round() as usize).clamp(1, n / 2 - 1);
        let xi = bin as f64 * dxi;
        // first-order-hold attenuation of the grid transform
        let s = xi * dz / 2.0;
        let att = (s.sin() / s).powi(2);
        xb.push(xi);
        fb.push(hat[bin] * scale * att);
    }
    // restore the masked origin neighbourhood exactly
    for sgn in [1.0f64, -1.0] {
        let g = geomspace(1e-13, z_fk, p.graded_nodes);
        let zs: Vec<f64> = if sgn > 0.0 {
            g.clone()
        } else {
            g.iter().rev().map(|v| -v).collect()
        };
        let kv: Vec<f64> = zs
            .iter()
            .map(|&z| {
                let v = kernel_value(kind, z) * window(z);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            })
            .collect();
        let add = piecewise_linear_ft(&zs, &kv, &xb);
        // the FFT already carries the seam ramp of the masked uniform grid
        // between the last masked node and the first kept one
        let ze = sgn * z_fk;
        let val = kernel_value(kind, ze) * window(ze);
        let (zr, kr) = if sgn > 0.0 {
            (vec![z_fk - dz, z_fk], vec![0.0, val])
        } else {
            (vec![-z_fk, -(z_fk - dz)], vec![val, 0.0])
        };
        let seam = piecewise_linear_ft(&zr, &kr, &xb);
        for i in 0..fb.len() {
            fb[i] += add[i] - seam[i];
        }
    }
    let amplitude: Vec<f64> = fb.iter().map(|c| c.norm()).collect();
    // log-space fits of c/xi and c ln(xi)/xi, plus a free power law
    let ly: Vec<f64> = amplitude.iter().map(|v| v.ln()).collect();
    let lx: Vec<f64> = xb.iter().map(|v| v.ln()).collect();
    let m = ly.len() as f64;
    let c_a = ly.iter().zip(&lx).map(|(y, x)| y + x).sum::<f64>() / m;
    let r_a = (ly
        .iter()
        .zip(&lx)
        .map(|(y, x)| (y - (c_a - x)).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    let c_b = ly
        .iter()
        .zip(&lx)
        .map(|(y, x)| y + x - x.ln())
        .sum::<f64>()
        / m;
    let r_b = (ly
        .iter()
        .zip(&lx)
        .map(|(y, x)| (y - (c_b + x.ln() - x)).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    let sx = lx.iter().sum::<f64>();
    let sy = ly.iter().sum::<f64>();
    let sxx = lx.iter().map(|x| x * x).sum::<f64>();
    let sxy = lx.iter().zip(&ly).map(|(x, y)| x * y).sum::<f64>();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let (model, residual, alt_residual) = if r_a <= r_b {
        (DecayModel::OverXi, r_a, r_b)
    } else {
        (DecayModel::LogOverXi, r_b, r_a)
    };
    Ok(DecayFit {
        xi: xb,
        amplitude,
        model,
        residual,
        alt_residual,
        slope,
        inconclusive: residual > 0.05,
    })
}

/// Boundary-point parameters feeding the 2D symbol formula, sampled on the
/// inner circle (outward normal -e_r, counterclockwise tangent).
#[derive(Debug, Clone, Copy)]
pub struct BoundaryProbe {
    pub b_mag: f64,
    pub b_dot_n: f64,
    /// cosine/sine of the angle between B and the tangent direction
    pub cos_theta: f64,
    pub sin_theta: f64,
}

impl BoundaryProbe {
    pub fn from_field(field: &dyn FieldEval, angle: f64) -> Self {
        let p = [angle.cos(), angle.sin()];
        let b = field.eval(p);
        let n = [-p[0], -p[1]];
        let tau = [-p[1], p[0]];
        let b_mag = (b[0] * b[0] + b[1] * b[1]).sqrt();
        let b_dot_n = b[0] * n[0] + b[1] * n[1];
        let b_dot_tau = b[0] * tau[0] + b[1] * tau[1];
        Self {
            b_mag,
            b_dot_n,
            cos_theta: b_dot_tau / b_mag,
            sin_theta: (1.0 - (b_dot_tau / b_mag).powi(2)).max(0.0).sqrt(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SymbolSample {
    pub k: i64,
    pub measured: Complex64,
    pub predicted: Complex64,
    pub rel_deviation: f64,
    pub phase_deviation: f64,
    /// off-diagonal column mass relative to the diagonal entry
    pub leakage: f64,
}

/// Predicted principal symbol (n.B)/(|xi| |B| (i sgn(xi) cos t + |sin t|))
/// at integer frequency xi = k.
pub fn predicted_symbol2d(probe: &BoundaryProbe, k: i64) -> Complex64 {
    let denom = Complex64::new(probe.sin_theta.abs(), (k.signum() as f64) * probe.cos_theta)
        * (k.abs() as f64)
        * probe.b_mag;
    Complex64::new(probe.b_dot_n, 0.0) / denom
}

/// Compare the diagonal multipliers of an assembled operator against the
/// predicted principal symbol over a range of modes.
pub fn numeric_symbol2d(
    a: &OperatorMatrix,
    probe: &BoundaryProbe,
    k_range: impl IntoIterator<Item = i64>,
) -> Vec<SymbolSample> {
    let kc = a.k_cut as i64;
    k_range
        .into_iter()
        .filter(|k| *k != 0 && k.unsigned_abs() as usize <= a.k_cut)
        .map(|k| {
            let measured = a.entry(k, k);
            let predicted = predicted_symbol2d(probe, k);
            let mut off = 0.0f64;
            for m in -kc..=kc {
                if m != k {
                    off += a.entry(m, k).norm_sqr();
                }
            }
            SymbolSample {
                k,
                measured,
                predicted,
                rel_deviation: (measured / predicted - Complex64::ONE).norm(),
                phase_deviation: {
                    let d = (measured / predicted).arg();
                    d.abs()
                },
                leakage: off.sqrt() / measured.norm(),
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SlopeFit {
    /// log-log slope of the raw operator diagonal l(l+1)|m_l|
    pub raw_slope: f64,
    /// slope after removing the known sub-principal part 4 + 12/(l-3)
    pub corrected_slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

fn loglog_slope(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let m = pts.len() as f64;
    let sx = pts.iter().map(|p| p.0).sum::<f64>();
    let sy = pts.iter().map(|p| p.1).sum::<f64>();
    let sxx = pts.iter().map(|p| p.0 * p.0).sum::<f64>();
    let sxy = pts.iter().map(|p| p.0 * p.1).sum::<f64>();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let intercept = (sy - slope * sx) / m;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    (slope, intercept, residual)
}

/// Linear-growth check for the 3D symbol. The operator diagonal on the Y_lm
/// basis is l(l+1) m_l (m_l alone is the b^(1)-trace normalization); its
/// closed form expands as -(l + 4 + 12/(l-3)) + O(a^{3-l}), so the raw
/// log-log slope over a finite window undershoots 1 through the additive
/// sub-principal constant. Both the raw fit and the fit with the known
/// sub-principal part removed are reported; the corrected slope isolates the
/// principal linear growth in |xi|_g ~ l. Needs l_lo >= 4 (l = 3 is the
/// resonant mode) and l_lo ~ 10 before the geometric tail is negligible.
pub fn numeric_symbol3d(l_lo: usize, l_max: usize, outer_radius: f64) -> SlopeFit {
    assert!(l_lo >= 4 && l_max > l_lo);
    let raw: Vec<(f64, f64)> = (l_lo..=l_max)
        .map(|l| {
            let d = (l * (l + 1)) as f64 * multiplier3d(l, outer_radius).abs();
            ((l as f64).ln(), d.ln())
        })
        .collect();
    let corrected: Vec<(f64, f64)> = (l_lo..=l_max)
        .map(|l| {
            let d = (l * (l + 1)) as f64 * multiplier3d(l, outer_radius).abs();
            let q = d - 4.0 - 12.0 / (l as f64 - 3.0);
            ((l as f64).ln(), q.abs().ln())
        })
        .collect();
    let (raw_slope, _, _) = loglog_slope(&raw);
    let (corrected_slope, intercept, residual) = loglog_slope(&corrected);
    SlopeFit {
        raw_slope,
        corrected_slope,
        intercept,
        residual,
    }
}

/// Admissibility scan: minimum field strength over a polar sampling of the
/// annulus and minimum |B.n| on both circles.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub min_field: f64,
    pub min_inflow: f64,
    pub min_outflow: f64,
    pub worst_point: [f64; 2],
    pub pass: bool,
}

pub fn check_field_admissible(
    field: &dyn FieldEval,
    outer_radius: f64,
    floor: f64,
) -> AdmissibilityReport {
    let n_r = 64;
    let n_phi = 128;
    let mut min_field = f64::INFINITY;
    let mut worst = [0.0, 0.0];
    for i in 0..n_r {
        let r = 1.0 + (outer_radius - 1.0) * i as f64 / (n_r - 1) as f64;
        for j in 0..n_phi {
            let t = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
            let p = [r * t.cos(), r * t.sin()];
            let b = field.eval(p);
            let mag = (b[0] * b[0] + b[1] * b[1]).sqrt();
            if mag < min_field {
                min_field = mag;
                worst = p;
            }
        }
    }
    let mut min_inflow = f64::INFINITY;
    let mut min_outflow = f64::INFINITY;
    for j in 0..n_phi {
        let t = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
        let e = [t.cos(), t.sin()];
        let b = field.eval(e);
        min_inflow = min_inflow.min((b[0] * e[0] + b[1] * e[1]).abs());
        let p = [outer_radius * e[0], outer_radius * e[1]];
        let b = field.eval(p);
        min_outflow = min_outflow.min((b[0] * e[0] + b[1] * e[1]).abs());
    }
    AdmissibilityReport {
        min_field,
        min_inflow,
        min_outflow,
        worst_point: worst,
        pass: min_field > floor && min_inflow > floor && min_outflow > floor,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::current2d::closed_form_multiplier;
    use crate::field::{Field2D, ReferenceField, SpiralField};
    use crate::geometry::{make_grid, AnnulusSpec};

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    #[test]
    fn one_sided_log_kernel_prefers_log_model() {
        let fit = kernel_ft_decay(KernelKind::OneSidedLog, 1 << 21).unwrap();
        assert_eq!(fit.model, DecayModel::LogOverXi);
        assert!(fit.discrimination() >= 10.0, "ratio {}", fit.discrimination());
        assert!(!fit.inconclusive);
        // exact one-sided transform magnitude: sqrt((ln xi + gamma)^2 + pi^2/4)/xi
        for (x, a) in fit.xi.iter().zip(&fit.amplitude) {
            let exact = ((x.ln() + EULER_GAMMA).powi(2)
                + std::f64::consts::PI.powi(2) / 4.0)
                .sqrt()
                / x;
            assert!(
                ((a - exact) / exact).abs() < 0.02,
                "xi={x}: {a} vs {exact}"
            );
        }
    }

    #[test]
    fn symmetric_log_kernel_prefers_plain_model() {
        let fit = kernel_ft_decay(KernelKind::SymmetricLog, 1 << 21).unwrap();
        assert_eq!(fit.model, DecayModel::OverXi);
        assert!(fit.discrimination() >= 10.0, "ratio {}", fit.discrimination());
        for (x, a) in fit.xi.iter().zip(&fit.amplitude) {
            let exact = std::f64::consts::PI / x;
            assert!(((a - exact) / exact).abs() < 0.02, "xi={x}");
        }
    }

    #[test]
    fn power_kernel_slope() {
        let fit = kernel_ft_decay(KernelKind::Power(0.5), 1 << 21).unwrap();
        assert!(
            (fit.slope + 0.5).abs() < 0.025,
            "slope {} (want -0.5 within 5%)",
            fit.slope
        );
        for (x, a) in fit.xi.iter().zip(&fit.amplitude) {
            let exact = (2.0 * std::f64::consts::PI / x).sqrt();
            assert!(((a - exact) / exact).abs() < 0.02, "xi={x}");
        }
    }

    #[test]
    fn model_choice_stable_under_refinement() {
        let coarse = kernel_ft_decay(KernelKind::OneSidedLog, 1 << 20).unwrap();
        assert_eq!(coarse.model, DecayModel::LogOverXi);
        let coarse = kernel_ft_decay(KernelKind::SymmetricLog, 1 << 20).unwrap();
        assert_eq!(coarse.model, DecayModel::OverXi);
    }

    #[test]
    fn rejects_tiny_sample_counts() {
        assert!(kernel_ft_decay(KernelKind::SymmetricLog, 1 << 10).is_err());
        assert!(kernel_ft_decay(KernelKind::SymmetricLog, 100_000).is_err());
    }

    fn diagonal_operator(k_cut: usize, l: f64) -> OperatorMatrix {
        let n = 2 * k_cut + 1;
        let mut mat = crate::num::dense::CMat::zeros(n);
        for k in -(k_cut as i64)..=(k_cut as i64) {
            let idx = (k_cut as i64 + k) as usize;
            *mat.at_mut(idx, idx) = Complex64::new(closed_form_multiplier(k, l), 0.0);
        }
        OperatorMatrix {
            k_cut,
            mat,
            fingerprint: 0,
        }
    }

    #[test]
    fn reference_symbol_probe_and_deviation_trend() {
        let grid = make_grid(AnnulusSpec::new(2.0).unwrap(), 32, 4).unwrap();
        let b = Field2D::reference(&grid);
        let probe = BoundaryProbe::from_field(&b, 0.7);
        assert!((probe.b_mag - 1.0).abs() < 1e-12);
        assert!((probe.b_dot_n + 1.0).abs() < 1e-12);
        assert!(probe.cos_theta.abs() < 1e-12 && (probe.sin_theta - 1.0).abs() < 1e-12);
        assert!((predicted_symbol2d(&probe, 8) - Complex64::new(-0.125, 0.0)).norm() < 1e-14);

        let a = diagonal_operator(64, 2.0);
        let samples = numeric_symbol2d(&a, &probe, 1..=64);
        // deviation decreases with k (smoothed over triples past k=16)
        let devs: Vec<f64> = samples.iter().map(|s| s.rel_deviation).collect();
        let smooth = |i: usize| (devs[i - 1] + devs[i] + devs[i + 1]) / 3.0;
        for i in 16..devs.len() - 2 {
            assert!(smooth(i + 1) <= smooth(i) * 1.0001, "k={}", i + 1);
        }
        // k=64 deviation equals the known sub-principal correction 2/(k-2)
        let last = samples.last().unwrap();
        assert!((last.rel_deviation - 2.0 / 62.0).abs() < 0.02 * (2.0 / 62.0));
        // low mode: large deviation, reported not asserted
        assert!(samples[0].rel_deviation > 10.0 * last.rel_deviation);
    }

    #[test]
    fn spiral_probe_angle() {
        let probe = BoundaryProbe::from_field(&SpiralField { beta: 0.5 }, 1.3);
        let want = 0.5 / (1.25f64).sqrt();
        assert!((probe.cos_theta - want).abs() < 1e-12);
        // predicted phase for k>0: arg(1/(i cos t + |sin t|)) plus pi from n.B<0
        let ph = predicted_symbol2d(&probe, 16).arg();
        let base = -(probe.cos_theta.atan2(probe.sin_theta));
        let diff = (ph - (base + std::f64::consts::PI) + std::f64::consts::PI)
            .rem_euclid(2.0 * std::f64::consts::PI)
            - std::f64::consts::PI;
        assert!(diff.abs() < 1e-12, "{ph} vs {base}");
    }

    #[test]
    fn symbol3d_slope_is_one() {
        for &radius in &[2.0, 10.0] {
            let fit = numeric_symbol3d(10, 32, radius);
            assert!(
                (fit.corrected_slope - 1.0).abs() < 0.03,
                "L={radius}: corrected slope {}",
                fit.corrected_slope
            );
            // raw slope undershoots through the sub-principal offset but
            // climbs toward 1 as the window moves up
            assert!(fit.raw_slope > 0.0 && fit.raw_slope < 1.0);
            let high = numeric_symbol3d(16, 32, radius);
            assert!(high.raw_slope > numeric_symbol3d(4, 32, radius).raw_slope);
        }
    }

    #[test]
    fn admissibility_scan() {
        let rep = check_field_admissible(&ReferenceField, 2.0, 0.1);
        assert!(rep.pass);
        assert!((rep.min_field - 0.5).abs() < 1e-12);
        assert!((rep.min_inflow - 1.0).abs() < 1e-12);
        // a uniform field kills B.n on the tangency points of the circles
        struct Uniform;
        impl FieldEval for Uniform {
            fn eval(&self, _p: [f64; 2]) -> [f64; 2] {
                [1.0, 0.0]
            }
            fn grad(&self, _p: [f64; 2]) -> [[f64; 2]; 2] {
                [[0.0; 2]; 2]
            }
        }
        let rep = check_field_admissible(&Uniform, 2.0, 0.1);
        assert!(!rep.pass);
    }
}
