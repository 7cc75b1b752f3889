//! Clamped cubic splines on a uniform grid.
//!
//! Endpoint slopes are supplied by the caller (we pass 4th-order one-sided
//! derivative estimates), which keeps interpolation error O(h^4) up to the
//! boundaries — a natural spline would degrade to O(h^2) there.

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct Spline {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    /// nodal derivatives (Hermite form)
    m: Vec<f64>,
}

impl Spline {
    /// Clamped spline through uniform samples with given end slopes.
    pub fn clamped(x0: f64, h: f64, y: &[f64], d0: f64, dn: f64) -> Self {
        let n = y.len();
        assert!(n >= 3);
        // Solve the tridiagonal system for nodal slopes m_i:
        //   m_{i-1} + 4 m_i + m_{i+1} = 3 (y_{i+1} - y_{i-1}) / h
        // with m_0, m_{n-1} prescribed.
        let mut m = vec![0.0; n];
        m[0] = d0;
        m[n - 1] = dn;
        if n > 2 {
            let dim = n - 2;
            let mut diag = vec![4.0; dim];
            let mut rhs = vec![0.0; dim];
            for i in 0..dim {
                rhs[i] = 3.0 * (y[i + 2] - y[i]) / h;
            }
            rhs[0] -= d0;
            rhs[dim - 1] -= dn;
            // Thomas elimination (sub/super diagonals are all 1)
            for i in 1..dim {
                let w = 1.0 / diag[i - 1];
                diag[i] -= w;
                rhs[i] -= rhs[i - 1] * w;
            }
            m[dim] = rhs[dim - 1] / diag[dim - 1];
            for i in (0..dim - 1).rev() {
                m[i + 1] = (rhs[i] - m[i + 2]) / diag[i];
            }
        }
        Self {
            x0,
            h,
            y: y.to_vec(),
            m,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        let t = (x - self.x0) / self.h;
        let i = (t.floor() as isize).clamp(0, n as isize - 2) as usize;
        let u = t - i as f64;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.m[i] * self.h, self.m[i + 1] * self.h);
        let u2 = u * u;
        let u3 = u2 * u;
        y0 * (2.0 * u3 - 3.0 * u2 + 1.0)
            + m0 * (u3 - 2.0 * u2 + u)
            + y1 * (-2.0 * u3 + 3.0 * u2)
            + m1 * (u3 - u2)
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        let n = self.y.len();
        let t = (x - self.x0) / self.h;
        let i = (t.floor() as isize).clamp(0, n as isize - 2) as usize;
        let u = t - i as f64;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.m[i] * self.h, self.m[i + 1] * self.h);
        let u2 = u * u;
        (y0 * (6.0 * u2 - 6.0 * u)
            + m0 * (3.0 * u2 - 4.0 * u + 1.0)
            + y1 * (-6.0 * u2 + 6.0 * u)
            + m1 * (3.0 * u2 - 2.0 * u))
            / self.h
    }
}

/// Pair of splines interpolating a complex radial profile.
#[derive(Debug, Clone)]
pub struct CSpline {
    re: Spline,
    im: Spline,
}

impl CSpline {
    pub fn clamped(x0: f64, h: f64, y: &[Complex64], d0: Complex64, dn: Complex64) -> Self {
        let yr: Vec<f64> = y.iter().map(|z| z.re).collect();
        let yi: Vec<f64> = y.iter().map(|z| z.im).collect();
        Self {
            re: Spline::clamped(x0, h, &yr, d0.re, dn.re),
            im: Spline::clamped(x0, h, &yi, d0.im, dn.im),
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        Complex64::new(self.re.eval(x), self.im.eval(x))
    }

    pub fn eval_deriv(&self, x: f64) -> Complex64 {
        Complex64::new(self.re.eval_deriv(x), self.im.eval_deriv(x))
    }
}
