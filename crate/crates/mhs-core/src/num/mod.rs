//! Shared numerical kernels: dense linear algebra, the canonical radial
//! derivative operator, angular FFTs, splines, ODE integration, quadrature.

pub mod dense;
pub mod dmatrix;
pub mod fft;
pub mod legendre;
pub mod ode;
pub mod quad;
pub mod spline;
