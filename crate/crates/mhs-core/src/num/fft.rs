//! Angular Fourier transforms on the periodic grid, thin wrappers over rustfft.

use std::sync::Mutex;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Forward transform of real nodal values: coefficients c_m with
/// f(theta_j) = sum_m c_m e^{i m theta_j}, ordered as rustfft bins
/// (m = 0, 1, ..., n/2-1, -n/2, ..., -1).
pub fn fft_forward(nodal: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = nodal.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_forward_c_inplace(&mut buf);
    buf
}

/// Forward transform of complex nodal values.
pub fn fft_forward_c(nodal: &[Complex64]) -> Vec<Complex64> {
    let mut buf = nodal.to_vec();
    fft_forward_c_inplace(&mut buf);
    buf
}

fn fft_forward_c_inplace(buf: &mut [Complex64]) {
    let n = buf.len();
    plan_forward(n, buf);
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Inverse transform back to nodal values (complex output).
pub fn fft_inverse(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut buf = coeffs.to_vec();
    plan_inverse(buf.len(), &mut buf);
    buf
}

/// Inverse transform, keeping the real part (input assumed conjugate-symmetric).
pub fn fft_inverse_real(coeffs: &[Complex64]) -> Vec<f64> {
    fft_inverse(coeffs).iter().map(|z| z.re).collect()
}

/// Integer wavenumber of rustfft bin `idx` for length `n`.
#[inline]
pub fn bin_wavenumber(idx: usize, n: usize) -> i64 {
    if idx <= n / 2 - 1 || n == 1 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

/// Bin index of integer wavenumber `k` (|k| < n/2).
#[inline]
pub fn wavenumber_bin(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Spectral d/dtheta of real nodal values on the periodic grid.
pub fn dtheta(nodal: &[f64]) -> Vec<f64> {
    let n = nodal.len();
    let mut c = fft_forward(nodal);
    for (idx, v) in c.iter_mut().enumerate() {
        let m = bin_wavenumber(idx, n) as f64;
        *v *= Complex64::new(0.0, m);
    }
    // Nyquist bin of d/dtheta is purely imaginary; dropping it keeps output real
    if n % 2 == 0 {
        c[n / 2] = Complex64::ZERO;
    }
    fft_inverse_real(&c)
}

// rustfft planners are cheap to reuse; a global planner avoids re-planning in
// hot per-radius loops.
static PLANNER: Mutex<Option<FftPlanner<f64>>> = Mutex::new(None);

fn plan_forward(n: usize, buf: &mut [Complex64]) {
    let mut guard = PLANNER.lock().unwrap();
    let planner = guard.get_or_insert_with(FftPlanner::new);
    let fft = planner.plan_fft_forward(n);
    drop(guard);
    fft.process(buf);
}

fn plan_inverse(n: usize, buf: &mut [Complex64]) {
    let mut guard = PLANNER.lock().unwrap();
    let planner = guard.get_or_insert_with(FftPlanner::new);
    let fft = planner.plan_fft_inverse(n);
    drop(guard);
    fft.process(buf);
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn roundtrip_and_coefficients() {
        let n = 32;
        let nodal: Vec<f64> = (0..n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                1.5 + (3.0 * t).cos() - 0.25 * (5.0 * t).sin()
            })
            .collect();
        let c = fft_forward(&nodal);
        assert!((c[0].re - 1.5).abs() < 1e-12);
        assert!((c[wavenumber_bin(3, n)] - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        assert!((c[wavenumber_bin(-5, n)] - Complex64::new(0.0, -0.125)).norm() < 1e-12);
        let back = fft_inverse_real(&c);
        for (a, b) in nodal.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_derivative() {
        let n = 64;
        let nodal: Vec<f64> = (0..n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                (4.0 * t).sin()
            })
            .collect();
        let d = dtheta(&nodal);
        for (j, v) in d.iter().enumerate() {
            let t = 2.0 * PI * j as f64 / n as f64;
            assert!((v - 4.0 * (4.0 * t).cos()).abs() < 1e-10);
        }
    }
}
