//! Solve subcommands: annulus / mapped 2D pipeline and the shell linear
//! sweep, each dumping plot-ready CSVs plus a JSON report.

use mhs_core::geometry::{make_grid, AnnulusSpec, TensorGrid2D};
use mhs_core::gradrubin2d::{
    reconstruct_pressure, solve_fixed_point_mode, IterationReport, PressureField,
};
use mhs_core::num::dense::RMat;
use mhs_core::shell3d::linear_sweep3d;
use mhs_core::transport2d::{footpoints, transport_scalar};

use crate::artifact::{ArtifactSink, Json};
use crate::config::LoadedConfig;
use crate::CliError;

fn report_json(reports: &[IterationReport]) -> Json {
    Json::Arr(
        reports
            .iter()
            .map(|r| {
                Json::obj(vec![
                    ("iter", Json::Int(r.iter as i64)),
                    ("increment", Json::Num(r.increment)),
                    (
                        "contraction",
                        r.contraction.map(Json::Num).unwrap_or(Json::Str("none".into())),
                    ),
                    ("lambda", Json::Num(r.lambda)),
                    ("j_gauge", Json::Num(r.j_gauge)),
                    ("equation_residual", Json::Num(r.equation_residual)),
                    ("cond_proxy", Json::Num(r.cond_proxy)),
                ])
            })
            .collect(),
    )
}

fn write_field_csvs(
    sink: &ArtifactSink,
    cfg: &LoadedConfig,
    grid: &TensorGrid2D,
    b_r: &RMat,
    b_phi: &RMat,
    current: &RMat,
    pressure: &PressureField,
) -> Result<(), CliError> {
    let (n_r, n_phi) = (grid.n_r, grid.n_phi);
    let rows = (0..n_r).flat_map(|i| {
        (0..n_phi).map(move |j| (i, j))
    });
    let fields_rows = rows.clone().map(|(i, j)| {
        vec![
            grid.r[i],
            grid.phi[j],
            b_r.at(i, j),
            b_phi.at(i, j),
            current.at(i, j),
            pressure.values.at(i, j),
        ]
    });
    sink.write_csv(
        &cfg.run.output.fields,
        &["r", "phi", "B_r", "B_phi", "j", "p"],
        fields_rows,
    )?;
    let pressure_rows = rows.map(|(i, j)| vec![grid.r[i], grid.phi[j], pressure.values.at(i, j)]);
    sink.write_csv(&cfg.run.output.pressure, &["r", "phi", "p"], pressure_rows)?;
    Ok(())
}

pub fn cmd_solve2d(cfg: &LoadedConfig, sink: &ArtifactSink) -> Result<(), CliError> {
    let data = cfg.run.boundary_data_2d()?;
    let solver = cfg.run.solver_config();
    let l = cfg.run.domain.outer_radius;
    match cfg.run.domain.kind.as_str() {
        "annulus" => {
            let sol = solve_fixed_point_mode(AnnulusSpec::new(l)?, &data, &solver, cfg.run.j_mode())?;
            let grid = &sol.field.grid;
            write_field_csvs(
                sink,
                cfg,
                grid,
                &sol.field.b_r,
                &sol.field.b_phi,
                &sol.current.values,
                &sol.pressure,
            )?;
            sink.write_json(
                &cfg.run.output.report,
                vec![
                    ("domain", Json::Str("annulus".into())),
                    ("iterations", report_json(&sol.reports)),
                    (
                        "residuals",
                        Json::obj(vec![
                            ("divergence", Json::Num(sol.residuals.divergence)),
                            ("curl_mismatch", Json::Num(sol.residuals.curl_mismatch)),
                            ("force_r", Json::Num(sol.residuals.force_r)),
                            ("force_phi", Json::Num(sol.residuals.force_phi)),
                            ("normal_inner", Json::Num(sol.residuals.normal_inner)),
                            ("normal_outer", Json::Num(sol.residuals.normal_outer)),
                            ("tangential_inner", Json::Num(sol.residuals.tangential_inner)),
                        ]),
                    ),
                    ("loop_defect", Json::Num(sol.pressure.loop_defect)),
                ],
            )?;
        }
        "mapped" => {
            if !matches!(cfg.run.j_mode(), mhs_core::current2d::JMode::PressureJ) {
                return Err(CliError::Config(
                    "mapped solves support pressure_J mode only".into(),
                ));
            }
            let map = cfg.run.diffeo_map();
            let sol = mhs_core::mapped2d::solve_mapped_fixed_point(&map, &data, &solver)?;
            let grid = make_grid(AnnulusSpec::new(l)?, solver.n_r, solver.k_cut)?;
            // current and pressure in reference coordinates (pullback fields)
            let fp = footpoints(&sol.field, &grid)?;
            let current = transport_scalar(&sol.j0, &fp);
            let pressure = reconstruct_pressure(&sol.field, &current, &grid)?;
            write_field_csvs(
                sink,
                cfg,
                &grid,
                &sol.field.b_r,
                &sol.field.b_phi,
                &current.values,
                &pressure,
            )?;
            sink.write_json(
                &cfg.run.output.report,
                vec![
                    ("domain", Json::Str("mapped".into())),
                    ("iterations", report_json(&sol.reports)),
                    ("tangential_residual", Json::Num(sol.tangential_residual)),
                    ("lambda", Json::Num(sol.lambda)),
                    ("j_gauge", Json::Num(sol.j_gauge)),
                ],
            )?;
        }
        other => {
            return Err(CliError::Config(format!(
                "solve2d requires an annulus or mapped domain, got {other:?}"
            )))
        }
    }
    Ok(())
}

pub fn cmd_shell3d(cfg: &LoadedConfig, sink: &ArtifactSink) -> Result<(), CliError> {
    if cfg.run.domain.kind != "shell" {
        return Err(CliError::Config("shell3d requires a shell domain".into()));
    }
    let data = cfg.run.shell_data()?;
    let l_max = cfg.run.discretization.l_max.unwrap_or(8);
    let report = linear_sweep3d(&data, cfg.run.domain.outer_radius, l_max, cfg.run.discretization.n_r)?;
    // per-mode radial profiles; modes without current carry no profile
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for mode in &report.modes {
        if let Some(p) = &mode.profile {
            for i in 0..p.r.len() {
                rows.push(vec![
                    mode.l as f64,
                    mode.m as f64,
                    p.r[i],
                    p.b_r[i].re,
                    p.b_r[i].im,
                    p.b1[i].re,
                    p.b1[i].im,
                    p.b2[i].re,
                    p.b2[i].im,
                ]);
            }
        }
    }
    sink.write_csv(
        &cfg.run.output.profiles,
        &["l", "m", "r", "Re_b_r", "Im_b_r", "Re_b1", "Im_b1", "Re_b2", "Im_b2"],
        rows.into_iter(),
    )?;
    let modes = report
        .modes
        .iter()
        .map(|m| {
            Json::obj(vec![
                ("l", Json::Int(m.l as i64)),
                ("m", Json::Int(m.m)),
                ("j2_re", Json::Num(m.j2.re)),
                ("j2_im", Json::Num(m.j2.im)),
                ("jrho_re", Json::Num(m.jrho.re)),
                ("jrho_im", Json::Num(m.jrho.im)),
                ("trace_psi_re", Json::Num(m.trace_psi.re)),
                ("trace_psi_im", Json::Num(m.trace_psi.im)),
                ("multiplier_fd", Json::Num(m.multiplier_fd)),
                ("multiplier_closed", Json::Num(m.multiplier_closed)),
                ("equation_residual", Json::Num(m.equation_residual.norm())),
            ])
        })
        .collect();
    sink.write_json(
        &cfg.run.output.report,
        vec![
            ("domain", Json::Str("shell".into())),
            ("trace_residual", Json::Num(report.trace_residual)),
            ("max_divergence_defect", Json::Num(report.max_divergence_defect)),
            ("modes", Json::Arr(modes)),
        ],
    )?;
    Ok(())
}
