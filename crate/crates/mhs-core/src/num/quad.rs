//! Quadrature rules: Gauss-Legendre on [-1,1] and the periodic trapezoid rule.

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre polynomial (standard Golub-Welsch-free construction).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Trapezoid rule for a periodic integrand sampled at n uniform points over
/// a period of length `period` (spectrally accurate for smooth data).
pub fn periodic_trapezoid(samples: &[f64], period: f64) -> f64 {
    let n = samples.len() as f64;
    samples.iter().sum::<f64>() * period / n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(6);
        // degree 11 is exact for n=6
        let integral: f64 = x.iter().zip(&w).map(|(&t, &wi)| wi * t.powi(10)).sum();
        assert!((integral - 2.0 / 11.0).abs() < 1e-13);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
    }

    #[test]
    fn trapezoid_periodic_exact_for_low_modes() {
        let n = 16;
        let samples: Vec<f64> = (0..n)
            .map(|j| {
                let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                2.0 + (3.0 * t).cos()
            })
            .collect();
        let v = periodic_trapezoid(&samples, 2.0 * std::f64::consts::PI);
        assert!((v - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }
}
