//! Orthonormal associated Legendre functions and real spherical-harmonic
//! evaluation, used by the sphere quadrature oracles in tests.

/// Normalized associated Legendre \bar P_l^m(x) such that the spherical
/// harmonics Y_lm = \bar P_l^m(cos theta) e^{i m phi} are orthonormal on the
/// unit sphere. Computed for m >= 0 by the standard stable recurrence.
pub fn legendre_norm(l: usize, m: usize, x: f64) -> f64 {
    assert!(m <= l);
    // \bar P_m^m
    let mut pmm = (1.0 / (4.0 * std::f64::consts::PI)).sqrt();
    if m > 0 {
        let sx2 = ((1.0 - x) * (1.0 + x)).max(0.0);
        let mut fact = 1.0;
        for k in 1..=m {
            pmm *= -((2.0 * k as f64 + 1.0) / (2.0 * k as f64)).sqrt();
            fact *= sx2;
        }
        pmm *= fact.sqrt();
        let _ = fact;
    }
    if l == m {
        return pmm;
    }
    // \bar P_{m+1}^m
    let mut pm1 = x * ((2 * m + 3) as f64).sqrt() * pmm;
    if l == m + 1 {
        return pm1;
    }
    let mut pl = 0.0;
    for ll in (m + 2)..=l {
        let lf = ll as f64;
        let mf = m as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
        pl = a * (x * pm1 - b * pmm);
        pmm = pm1;
        pm1 = pl;
    }
    pl
}

/// d/dtheta of \bar P_l^m(cos theta), from the derivative recurrence
/// dP/dtheta = (l x P_l^m - c_{lm} P_{l-1}^m) / (-sin theta) ... evaluated
/// stably via the relation with \bar P_l^{m±1}; here we use the simple
/// finite-difference-free identity:
///   sin(theta) d/dx \bar P = -d/dtheta \bar P.
pub fn legendre_norm_dtheta(l: usize, m: usize, theta: f64) -> f64 {
    let x = theta.cos();
    let s = theta.sin();
    if l == 0 {
        return 0.0;
    }
    // d/dtheta \bar P_l^m(cos t) = (1/s) [ l x \bar P_l^m - A_lm \bar P_{l-1}^m ]
    // with A_lm = sqrt((2l+1)/(2l-1) * (l^2-m^2)); guard the poles.
    if s.abs() < 1e-9 {
        return 0.0;
    }
    let lf = l as f64;
    let mf = m as f64;
    let plm = legendre_norm(l, m, x);
    let plm1 = if l >= 1 && m <= l - 1 {
        legendre_norm(l - 1, m, x)
    } else {
        0.0
    };
    let a = ((2.0 * lf + 1.0) / (2.0 * lf - 1.0) * (lf * lf - mf * mf)).sqrt();
    (lf * x * plm - a * plm1) / s
}
