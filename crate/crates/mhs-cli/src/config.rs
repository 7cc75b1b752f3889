//! Run configuration: a single strict-schema JSON file drives every
//! subcommand. Unknown keys are rejected so acceptance runs stay
//! reproducible.

use std::path::Path;

use mhs_core::current2d::JMode;
use mhs_core::field::BoundaryFourier;
use mhs_core::geometry::DiffeoMap;
use mhs_core::gradrubin2d::{BoundaryData, SolverConfig};
use mhs_core::shell3d::{BoundarySH, ShellData, TangentSH};
use num_complex::Complex64;
use serde::Deserialize;

use crate::CliError;

/// 2D boundary mode: wavenumber, real part, imaginary part.
pub type Mode2D = (i64, f64, f64);
/// Spherical-harmonic mode: degree l, order m, real part, imaginary part.
pub type Mode3D = (usize, i64, f64, f64);

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBlock {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(rename = "L")]
    pub outer_radius: f64,
    /// bump amplitude (mapped domains)
    pub eps: Option<f64>,
    pub rotation: Option<f64>,
    pub cos_coeffs: Option<Vec<f64>>,
    pub sin_coeffs: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationBlock {
    /// angular cutoff K (2D); doubles as k_max for verify suites
    pub k_cut: Option<usize>,
    /// maximum spherical-harmonic degree (shell)
    pub l_max: Option<usize>,
    pub n_r: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundaryBlock {
    /// 2D normal-trace modes on the inner / outer circle
    pub f_in: Vec<Mode2D>,
    pub f_out: Vec<Mode2D>,
    /// 2D tangential-trace modes on the inner circle
    pub g: Vec<Mode2D>,
    /// shell normal-trace modes on the inner / outer sphere
    pub f_in_lm: Vec<Mode3D>,
    pub f_out_lm: Vec<Mode3D>,
    /// shell tangential data, Psi-part and Phi-part coefficients
    pub g_psi: Vec<Mode3D>,
    pub g_phi: Vec<Mode3D>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverBlock {
    pub tol_fixed_point: f64,
    pub tol_residual: f64,
    pub max_iter: usize,
    pub damping: f64,
    /// "pressure_J" or "fixed_J"
    pub mode: String,
    /// circulation constant when mode = "fixed_J"
    #[serde(rename = "J")]
    pub j: Option<f64>,
    pub reuse_operator: bool,
}

impl Default for SolverBlock {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            tol_fixed_point: d.tol_fixed_point,
            tol_residual: d.tol_residual,
            max_iter: d.max_iter,
            damping: d.damping,
            mode: "pressure_J".into(),
            j: None,
            reuse_operator: d.reuse_operator,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub fields: String,
    pub pressure: String,
    pub report: String,
    pub profiles: String,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            fields: "fields.csv".into(),
            pressure: "pressure.csv".into(),
            report: "report.json".into(),
            profiles: "profiles.csv".into(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainBlock,
    pub discretization: DiscretizationBlock,
    #[serde(default)]
    pub boundary: BoundaryBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

/// A parsed config together with the raw bytes it was read from (hashed into
/// every artifact header).
pub struct LoadedConfig {
    pub run: RunConfig,
    pub raw: Vec<u8>,
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, CliError> {
    let raw = std::fs::read(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let run: RunConfig = serde_json::from_slice(&raw)
        .map_err(|e| CliError::Config(format!("schema error in {}: {e}", path.display())))?;
    run.validate()?;
    Ok(LoadedConfig { run, raw })
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        match self.domain.kind.as_str() {
            "annulus" | "mapped" | "shell" => {}
            other => {
                return Err(CliError::Config(format!(
                    "domain type must be annulus, mapped, or shell, got {other:?}"
                )))
            }
        }
        if !(self.domain.outer_radius > 1.0) {
            return Err(CliError::Config("L must exceed 1".into()));
        }
        if self.domain.kind == "mapped" && self.domain.eps.is_none() {
            return Err(CliError::Config("mapped domain requires eps".into()));
        }
        if self.domain.kind == "shell" {
            if self.discretization.l_max.is_none() {
                return Err(CliError::Config("shell domain requires l_max".into()));
            }
        } else if self.discretization.k_cut.is_none() {
            return Err(CliError::Config("2D domain requires k_cut".into()));
        }
        match self.solver.mode.as_str() {
            "pressure_J" => {}
            "fixed_J" => {
                if self.solver.j.is_none() {
                    return Err(CliError::Config("fixed_J mode requires J".into()));
                }
            }
            other => {
                return Err(CliError::Config(format!(
                    "solver mode must be pressure_J or fixed_J, got {other:?}"
                )))
            }
        }
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            k_cut: self.discretization.k_cut.unwrap_or(8),
            n_r: self.discretization.n_r,
            tol_fixed_point: self.solver.tol_fixed_point,
            tol_residual: self.solver.tol_residual,
            max_iter: self.solver.max_iter,
            damping: self.solver.damping,
            reuse_operator: self.solver.reuse_operator,
        }
    }

    pub fn j_mode(&self) -> JMode {
        match self.solver.mode.as_str() {
            "fixed_J" => JMode::FixedJ(self.solver.j.unwrap_or(0.0)),
            _ => JMode::PressureJ,
        }
    }

    pub fn boundary_data_2d(&self) -> Result<BoundaryData, CliError> {
        let k_cut = self.discretization.k_cut.unwrap_or(8);
        let to_bf = |modes: &[Mode2D]| -> Result<BoundaryFourier, CliError> {
            let mut bf = BoundaryFourier::zeros(k_cut);
            for &(k, re, im) in modes {
                if k.unsigned_abs() as usize > k_cut {
                    return Err(CliError::Config(format!(
                        "boundary mode k={k} exceeds k_cut={k_cut}"
                    )));
                }
                bf.set(k, Complex64::new(re, im));
            }
            Ok(bf)
        };
        Ok(BoundaryData {
            f_in: to_bf(&self.boundary.f_in)?,
            f_out: to_bf(&self.boundary.f_out)?,
            g: to_bf(&self.boundary.g)?,
        })
    }

    pub fn shell_data(&self) -> Result<ShellData, CliError> {
        let l_max = self.discretization.l_max.unwrap_or(8);
        let to_sh = |modes: &[Mode3D]| -> Result<BoundarySH, CliError> {
            let mut sh = BoundarySH::zeros(l_max);
            for &(l, m, re, im) in modes {
                if l > l_max || m.unsigned_abs() as usize > l {
                    return Err(CliError::Config(format!(
                        "invalid shell mode (l={l}, m={m}) for l_max={l_max}"
                    )));
                }
                sh.set(l, m, Complex64::new(re, im));
            }
            Ok(sh)
        };
        Ok(ShellData {
            f_in: to_sh(&self.boundary.f_in_lm)?,
            f_out: to_sh(&self.boundary.f_out_lm)?,
            g: TangentSH {
                psi_part: to_sh(&self.boundary.g_psi)?,
                phi_part: to_sh(&self.boundary.g_phi)?,
            },
        })
    }

    pub fn diffeo_map(&self) -> DiffeoMap {
        let mut map = DiffeoMap::radial_bump(self.domain.outer_radius, self.domain.eps.unwrap_or(0.0));
        if let Some(rot) = self.domain.rotation {
            map.rotation = rot;
        }
        if let Some(c) = &self.domain.cos_coeffs {
            map.cos_coeffs = c.clone();
        }
        if let Some(s) = &self.domain.sin_coeffs {
            map.sin_coeffs = s.clone();
        }
        map
    }
}
