//! Magnetohydrostatic equilibria on annular and spherical-shell domains:
//! transport / div-curl / boundary-equation fixed-point solver and the
//! operator-symbol verification suite.

pub mod current2d;
pub mod divcurl2d;
pub mod elliptic2d;
pub mod error;
pub mod field;
pub mod geometry;
pub mod gradrubin2d;
pub mod mapped2d;
pub mod num;
pub mod shell3d;
pub mod transport2d;
pub mod verify;

pub use error::{MhsError, MhsResult};
