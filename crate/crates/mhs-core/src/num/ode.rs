//! Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)) for small systems.

/// Integration options.
#[derive(Debug, Clone, Copy)]
pub struct OdeOpts {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOpts {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 1e-3,
            h_max: 0.25,
            max_steps: 200_000,
        }
    }
}

/// Outcome of a single accepted step.
#[derive(Debug, Clone)]
pub struct OdeStep {
    pub s: f64,
    pub y: Vec<f64>,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// embedded 4th-order weights
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;

/// One Dormand-Prince step of size h from (s, y); returns (y5, error estimate).
pub fn dp_step<F>(f: &F, s: f64, y: &[f64], h: f64) -> (Vec<f64>, f64)
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let n = y.len();
    let k1 = f(s, y);
    let comb = |coeffs: &[(f64, &Vec<f64>)]| -> Vec<f64> {
        let mut out = y.to_vec();
        for (c, k) in coeffs {
            for i in 0..n {
                out[i] += h * c * k[i];
            }
        }
        out
    };
    let k2 = f(s + h / 5.0, &comb(&[(A21, &k1)]));
    let k3 = f(s + 0.3 * h, &comb(&[(A31, &k1), (A32, &k2)]));
    let k4 = f(s + 0.8 * h, &comb(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(
        s + 8.0 / 9.0 * h,
        &comb(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        s + h,
        &comb(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y5 = comb(&[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(s + h, &y5);
    let mut err = 0.0f64;
    for i in 0..n {
        let y4i = y[i]
            + h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        err = err.max((y5[i] - y4i).abs());
    }
    (y5, err)
}

/// Integrate dy/ds = f(s,y) until `stop(s, y)` returns true or the step budget
/// is exhausted. Calls `on_step` after each accepted step. Returns the final
/// accepted state; the caller refines the stopping point (e.g. bisection on a
/// boundary crossing) from the last pre-crossing state.
pub fn integrate_until<F, G>(
    f: &F,
    mut s: f64,
    y0: &[f64],
    opts: &OdeOpts,
    mut stop: G,
) -> Result<(f64, Vec<f64>, f64), String>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
    G: FnMut(f64, &[f64]) -> bool,
{
    let mut y = y0.to_vec();
    let mut h = opts.h_init;
    for _ in 0..opts.max_steps {
        if stop(s, &y) {
            return Ok((s, y, h));
        }
        h = h.min(opts.h_max);
        let (y_new, err) = dp_step(f, s, &y, h);
        let scale = opts.atol + opts.rtol * norm_inf(&y).max(norm_inf(&y_new));
        if err <= scale {
            s += h;
            y = y_new;
            // PI-free simple step growth
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * (scale / err).powf(0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        } else {
            h *= (0.9 * (scale / err).powf(0.2)).clamp(0.1, 1.0);
            if h < 1e-14 {
                return Err("step size collapsed".into());
            }
        }
    }
    Err("step budget exhausted before stop condition".into())
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
