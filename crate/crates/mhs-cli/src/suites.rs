//! Verification suites: each runs one acceptance family, writes a JSON
//! report of measured values against tolerances, and fails (exit 3) when
//! any check misses.

use mhs_core::current2d::{assemble_a, closed_form_multiplier};
use mhs_core::elliptic2d::ModeSolver;
use mhs_core::field::{ReferenceField, SpiralField};
use mhs_core::geometry::{make_grid, AnnulusSpec};
use mhs_core::mapped2d::mapped_operator_deviation;
use mhs_core::shell3d::{multiplier3d, solve_radial_bvp};
use mhs_core::verify::{
    kernel_ft_decay, numeric_symbol2d, numeric_symbol3d, BoundaryProbe, DecayModel, KernelKind,
};
use num_complex::Complex64;

use crate::artifact::{ArtifactSink, Json};
use crate::config::LoadedConfig;
use crate::CliError;

struct Check {
    name: &'static str,
    measured: f64,
    tolerance: f64,
    pass: bool,
}

impl Check {
    fn upper(name: &'static str, measured: f64, tolerance: f64) -> Self {
        Self {
            name,
            measured,
            tolerance,
            pass: measured <= tolerance,
        }
    }

    fn lower(name: &'static str, measured: f64, floor: f64) -> Self {
        Self {
            name,
            measured,
            tolerance: floor,
            pass: measured >= floor,
        }
    }
}

fn finish(
    suite: &str,
    sink: &ArtifactSink,
    report_name: &str,
    checks: Vec<Check>,
    extra: Vec<(&str, Json)>,
) -> Result<(), CliError> {
    let all_pass = checks.iter().all(|c| c.pass);
    let mut fields = vec![
        ("suite", Json::Str(suite.into())),
        ("pass", Json::Bool(all_pass)),
        (
            "checks",
            Json::Arr(
                checks
                    .iter()
                    .map(|c| {
                        Json::obj(vec![
                            ("name", Json::Str(c.name.into())),
                            ("measured", Json::Num(c.measured)),
                            ("tolerance", Json::Num(c.tolerance)),
                            ("pass", Json::Bool(c.pass)),
                        ])
                    })
                    .collect(),
            ),
        ),
    ];
    fields.extend(extra);
    sink.write_json(report_name, fields)?;
    if all_pass {
        Ok(())
    } else {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        Err(CliError::Verification(format!(
            "suite {suite}: failed checks: {}",
            failed.join(", ")
        )))
    }
}

/// Suite parameters with per-suite defaults, overridable from a config file.
struct SuiteParams {
    outer_radius: f64,
    k_cut: usize,
    l_max: usize,
    n_r: usize,
}

fn params(cfg: Option<&LoadedConfig>, l: f64, k_cut: usize, l_max: usize, n_r: usize) -> SuiteParams {
    let mut p = SuiteParams {
        outer_radius: l,
        k_cut,
        l_max,
        n_r,
    };
    if let Some(c) = cfg {
        p.outer_radius = c.run.domain.outer_radius;
        if let Some(k) = c.run.discretization.k_cut {
            p.k_cut = k;
        }
        if let Some(lm) = c.run.discretization.l_max {
            p.l_max = lm;
        }
        p.n_r = c.run.discretization.n_r;
    }
    p
}

fn suite_multipliers2d(p: &SuiteParams, sink: &ArtifactSink, report: &str) -> Result<(), CliError> {
    let grid = make_grid(AnnulusSpec::new(p.outer_radius)?, p.n_r, p.k_cut)?;
    let solver = ModeSolver::for_grid(&grid)?;
    let a = assemble_a(&ReferenceField, p.k_cut, &grid, &solver)?;
    let kc = p.k_cut as i64;
    let mut worst_rel = 0.0f64;
    let mut table = Vec::new();
    for k in -kc..=kc {
        let closed = closed_form_multiplier(k, p.outer_radius);
        let measured = a.entry(k, k);
        let rel = (measured - Complex64::new(closed, 0.0)).norm() / closed.abs().max(1e-300);
        worst_rel = worst_rel.max(rel);
        table.push(Json::obj(vec![
            ("k", Json::Int(k)),
            ("measured_re", Json::Num(measured.re)),
            ("measured_im", Json::Num(measured.im)),
            ("closed_form", Json::Num(closed)),
            ("rel_error", Json::Num(rel)),
        ]));
    }
    let checks = vec![
        Check::upper("offdiagonal_mass_ratio", a.offdiag_ratio(), 1e-8),
        Check::upper("diagonal_rel_error", worst_rel, 1e-6),
    ];
    finish("multipliers2d", sink, report, checks, vec![("multipliers", Json::Arr(table))])
}

fn suite_symbol2d(p: &SuiteParams, sink: &ArtifactSink, report: &str) -> Result<(), CliError> {
    let grid = make_grid(AnnulusSpec::new(p.outer_radius)?, p.n_r, p.k_cut)?;
    let solver = ModeSolver::for_grid(&grid)?;
    let k_max = p.k_cut as i64;
    let ks: Vec<i64> = (1..=k_max).collect();

    let a0 = assemble_a(&ReferenceField, p.k_cut, &grid, &solver)?;
    let probe0 = BoundaryProbe::from_field(&ReferenceField, 0.0);
    let s0 = numeric_symbol2d(&a0, &probe0, ks.iter().copied());
    let terminal = s0.last().expect("k range nonempty");
    // the multiplier's sub-principal part shifts k m_k from -1 by 2/(k-2);
    // the suite demands both the asymptotic smallness and the exact match of
    // that correction, so an under-resolved k_max misses the first check
    let model = 2.0 / (k_max as f64 - 2.0);
    let spiral = SpiralField { beta: 0.5 };
    let a1 = assemble_a(&spiral, p.k_cut, &grid, &solver)?;
    let probe1 = BoundaryProbe::from_field(&spiral, 0.0);
    let s1 = numeric_symbol2d(&a1, &probe1, ks.iter().copied());
    let sp = s1.last().expect("k range nonempty");
    let phase_rel = sp.phase_deviation / sp.predicted.arg().abs().max(1e-300);

    let checks = vec![
        Check::upper("b0_terminal_deviation", terminal.rel_deviation, 0.05),
        Check::upper(
            "b0_subprincipal_match",
            (terminal.rel_deviation - model).abs() / model,
            0.02,
        ),
        Check::upper("spiral_phase_rel_error", phase_rel, 0.03),
        Check::upper("spiral_leakage", sp.leakage, 1e-6),
    ];
    let table = s0
        .iter()
        .map(|s| {
            Json::obj(vec![
                ("k", Json::Int(s.k)),
                ("rel_deviation", Json::Num(s.rel_deviation)),
                ("leakage", Json::Num(s.leakage)),
            ])
        })
        .collect();
    finish("symbol2d", sink, report, checks, vec![("b0_samples", Json::Arr(table))])
}

fn suite_kernels(sink: &ArtifactSink, report: &str) -> Result<(), CliError> {
    let n = 1 << 21;
    let one_sided = kernel_ft_decay(KernelKind::OneSidedLog, n)?;
    let symmetric = kernel_ft_decay(KernelKind::SymmetricLog, n)?;
    let checks = vec![
        Check::lower(
            "one_sided_picks_log_over_xi",
            if one_sided.model == DecayModel::LogOverXi { 1.0 } else { 0.0 },
            1.0,
        ),
        Check::lower("one_sided_discrimination", one_sided.discrimination(), 10.0),
        Check::lower(
            "symmetric_picks_over_xi",
            if symmetric.model == DecayModel::OverXi { 1.0 } else { 0.0 },
            1.0,
        ),
        Check::lower("symmetric_discrimination", symmetric.discrimination(), 10.0),
    ];
    let table = |fit: &mhs_core::verify::DecayFit| {
        Json::Arr(
            fit.xi
                .iter()
                .zip(&fit.amplitude)
                .map(|(&x, &a)| Json::Arr(vec![Json::Num(x), Json::Num(a)]))
                .collect(),
        )
    };
    finish(
        "kernels",
        sink,
        report,
        checks,
        vec![
            ("one_sided_table", table(&one_sided)),
            ("symmetric_table", table(&symmetric)),
        ],
    )
}

fn suite_multipliers3d(p: &SuiteParams, sink: &ArtifactSink, report: &str) -> Result<(), CliError> {
    let mut worst_rel = 0.0f64;
    for &a in &[1.5, 2.0, 5.0] {
        for l in 1..=p.l_max {
            let closed = multiplier3d(l, a);
            let prof = solve_radial_bvp(l, Complex64::ZERO, Complex64::ONE, a, p.n_r)?;
            let fd = prof.b1[0].re;
            worst_rel = worst_rel.max((fd - closed).abs() / closed.abs().max(1e-300));
        }
    }
    let mut min_abs = f64::INFINITY;
    for i in 0..50 {
        let a = 1.05 * (10.0f64 / 1.05).powf(i as f64 / 49.0);
        for l in 1..=p.l_max {
            min_abs = min_abs.min(multiplier3d(l, a).abs());
        }
    }
    let checks = vec![
        Check::upper("fd_rel_error", worst_rel, 1e-6),
        Check::lower("min_multiplier_magnitude", min_abs, 1e-6),
    ];
    finish("multipliers3d", sink, report, checks, vec![])
}

fn suite_symbol3d(p: &SuiteParams, sink: &ArtifactSink, report: &str) -> Result<(), CliError> {
    let l_max = p.l_max.max(16);
    let mut checks = Vec::new();
    let mut extra = Vec::new();
    let fit_a = numeric_symbol3d(10, l_max, 2.0);
    let fit_b = numeric_symbol3d(10, l_max, 10.0);
    checks.push(Check::upper(
        "corrected_slope_error_L2",
        (fit_a.corrected_slope - 1.0).abs(),
        0.03,
    ));
    checks.push(Check::upper(
        "corrected_slope_error_L10",
        (fit_b.corrected_slope - 1.0).abs(),
        0.03,
    ));
    extra.push((
        "fits",
        Json::Arr(vec![
            Json::obj(vec![
                ("L", Json::Num(2.0)),
                ("raw_slope", Json::Num(fit_a.raw_slope)),
                ("corrected_slope", Json::Num(fit_a.corrected_slope)),
            ]),
            Json::obj(vec![
                ("L", Json::Num(10.0)),
                ("raw_slope", Json::Num(fit_b.raw_slope)),
                ("corrected_slope", Json::Num(fit_b.corrected_slope)),
            ]),
        ]),
    ));
    finish("symbol3d", sink, report, checks, extra)
}

fn suite_mapped2d(p: &SuiteParams, sink: &ArtifactSink, report: &str) -> Result<(), CliError> {
    let eps_list = [0.02, 0.05, 0.1];
    let mut comparisons = Vec::new();
    for &eps in &eps_list {
        comparisons.push(mapped_operator_deviation(p.outer_radius, p.k_cut, p.n_r, eps)?);
    }
    let mean_c = comparisons.iter().map(|c| c.stability_c).sum::<f64>() / comparisons.len() as f64;
    let max_spread = comparisons
        .iter()
        .map(|c| (c.stability_c - mean_c).abs() / mean_c)
        .fold(0.0f64, f64::max);
    let checks = vec![
        Check::upper("stability_constant_spread", max_spread, 0.20),
        Check::upper("stability_constant", mean_c, 10.0),
    ];
    let table = comparisons
        .iter()
        .map(|c| {
            Json::obj(vec![
                ("eps", Json::Num(c.eps)),
                ("diff_norm", Json::Num(c.diff_norm)),
                ("stability_c", Json::Num(c.stability_c)),
            ])
        })
        .collect();
    finish("mapped2d", sink, report, checks, vec![("comparisons", Json::Arr(table))])
}

pub fn cmd_verify(
    suite: &str,
    cfg: Option<&LoadedConfig>,
    sink: &ArtifactSink,
) -> Result<(), CliError> {
    let report = cfg
        .map(|c| c.run.output.report.clone())
        .unwrap_or_else(|| format!("{suite}.json"));
    match suite {
        "multipliers2d" => suite_multipliers2d(&params(cfg, 2.0, 16, 0, 256), sink, &report),
        "symbol2d" => suite_symbol2d(&params(cfg, 2.0, 64, 0, 256), sink, &report),
        "kernels" => suite_kernels(sink, &report),
        "multipliers3d" => suite_multipliers3d(&params(cfg, 2.0, 0, 16, 2048), sink, &report),
        "symbol3d" => suite_symbol3d(&params(cfg, 2.0, 0, 32, 256), sink, &report),
        "mapped2d" => suite_mapped2d(&params(cfg, 2.0, 8, 0, 96), sink, &report),
        other => Err(CliError::Config(format!(
            "unknown suite {other:?}; expected one of multipliers2d, symbol2d, kernels, multipliers3d, symbol3d, mapped2d"
        ))),
    }
}
