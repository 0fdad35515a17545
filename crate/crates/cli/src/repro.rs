//! Bundled case-study suite: four reference systems (first-order lag,
//! integrator-driven phase-angle dynamics, filtered swing dynamics, and
//! their 2x2 coupling) analyzed end to end, with tables and plot data
//! written to a directory.

use std::fmt::Write as _;
use std::path::Path;

use pdregion::bands::{self, BandMode};
use pdregion::genpass::{self, ROperator};
use pdregion::margins::{self, QuadSpec};
use pdregion::passivity;
use pdregion::pdcore::{self, PassivityIndex};
use pdregion::systems;
use pdregion::tfparse::{SystemEntry, SystemFile, SystemKind};
use pdregion::{GridSpec, RationalMatrix, ToleranceConfig};

use crate::output::{curves_to_csv, fmt_sig, Curve};
use crate::{circle_curve, CliError, CliResult};

pub fn run_reproduce(dir: &Path, cfg: &ToleranceConfig) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    let mut summary = String::new();
    let _ = writeln!(summary, "case-study suite");
    let _ = writeln!(
        summary,
        "parameters: tau={} k={} M={} d={} T={} C={}",
        systems::TAU,
        systems::K,
        systems::M,
        systems::D,
        systems::T,
        systems::C
    );

    write_system_files(dir)?;
    let _ = writeln!(summary, "systems: g1.json g2.json g3.json g4.json");

    // critical frequencies of the filtered swing dynamics
    let g3 = RationalMatrix::from_scalar(systems::g3());
    let mut table = String::from("sigma\tfirst_failing_grid_point\trefined_edge\n");
    let mut crit_summary = Vec::new();
    for sigma in [-0.5, -0.2, 0.0, 0.2, 0.5] {
        let band = bands::pd_band(
            &g3,
            &PassivityIndex::scalar(sigma),
            &GridSpec::default_band(),
            BandMode::SisoExact,
            cfg,
        )?;
        let collapsed = band.intervals.len() == 1
            && band.intervals[0].is_point()
            && band.intervals[0].lo.w == 0.0;
        let grid_point = if collapsed {
            "0.0000".to_string()
        } else {
            format!(
                "{:.4}",
                bands::first_failing_grid_point(&g3, sigma, 0.01, cfg)?
            )
        };
        let edge = band
            .upper_edge()
            .map(|e| fmt_sig(e, 6))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(table, "{sigma}\t{grid_point}\t{edge}");
        crit_summary.push(grid_point);
    }
    std::fs::write(dir.join("critical_frequencies.txt"), &table)?;
    let _ = writeln!(
        summary,
        "critical grid points (sigma -0.5..0.5): {}",
        crit_summary.join(" / ")
    );

    // first-order lag passivization verdicts with the oracle
    let grid = GridSpec::default_band();
    let mut g1_reports = serde_json::Map::new();
    for (label, sigma) in [("sigma_one_third", 1.0 / 3.0), ("sigma_one", 1.0)] {
        let mut rep = passivity::of_passivity_check(&systems::g1(), sigma, &grid, cfg)?;
        rep.oracle_verdict = Some(passivity::oracle_of_passivity(
            &systems::g1(),
            sigma,
            &grid,
            cfg,
        )?);
        let _ = writeln!(summary, "g1 {label}: {:?}", rep.verdict);
        g1_reports.insert(label.to_string(), serde_json::to_value(&rep).unwrap());
    }
    write_json(dir, "g1_passivity.json", &g1_reports)?;

    // phase-angle dynamics: empty bands plus the origin residue
    let g2 = RationalMatrix::from_scalar(systems::g2());
    let mut g2_report = serde_json::Map::new();
    for sigma in [0.0, 0.1, 1.0] {
        let band = bands::pd_band(
            &g2,
            &PassivityIndex::scalar(sigma),
            &GridSpec::default_band(),
            BandMode::SisoExact,
            cfg,
        )?;
        g2_report.insert(
            format!("band_empty_sigma_{sigma}"),
            serde_json::Value::Bool(band.is_empty()),
        );
    }
    let residues = passivity::axis_residues(&systems::g2(), cfg)?;
    g2_report.insert(
        "origin_residue".to_string(),
        serde_json::to_value(residues[0].residue.re).unwrap(),
    );
    let _ = writeln!(
        summary,
        "g2: bands empty for sigma in {{0, 0.1, 1}}, origin residue = {}",
        fmt_sig(residues[0].residue.re, 6)
    );
    write_json(dir, "g2_report.json", &g2_report)?;

    // coupled 2x2 system: necessary check across the range sampling
    let g4 = systems::g4();
    let sigma4 = PassivityIndex::identity_scaled(2, 1.0 / 3.0);
    let fig_grid = GridSpec::log(1e-3, 1e2, 10)?;
    let mut rows = Vec::new();
    let mut first_fail = None;
    for w in fig_grid.points() {
        let c = pdcore::pd_check_mimo_necessary(&g4, &sigma4, w, 64, cfg)?;
        if !c.holds && first_fail.is_none() {
            first_fail = Some(w);
        }
        rows.push((
            w,
            c.worst_point.re,
            c.worst_point.im,
            Some(if c.holds { 1.0 } else { 0.0 }),
        ));
    }
    let necessary_curve = Curve {
        name: "g4_necessary_holds".into(),
        rows,
    };
    std::fs::write(
        dir.join("g4_necessary.csv"),
        curves_to_csv(&[necessary_curve], 6),
    )?;
    if let Some(w) = first_fail {
        let _ = writeln!(
            summary,
            "g4 (sigma = I/3): necessary check first fails at w = {} (log10 = {:.2})",
            fmt_sig(w, 6),
            w.log10()
        );
    }

    // numerical-range slices around the failure onset
    let mut slice_curves = Vec::new();
    for w in [10f64.powf(0.3), 10f64.powf(0.7)] {
        let m = g4.eval_jw(w, cfg)?;
        let b = pdregion::hermlin::numerical_range(&m, 128);
        slice_curves.push(Curve {
            name: format!("range_w{}", fmt_sig(w, 6)),
            rows: b
                .boundary_points
                .iter()
                .zip(&b.support_values)
                .map(|(p, &sv)| (w, p.re, p.im, Some(sv)))
                .collect(),
        });
    }
    slice_curves.push(circle_curve(&crate::output::CircleOverlay {
        name: "pd_region_sigma_0.333333".into(),
        center: num_complex::Complex64::new(1.5, 0.0),
        radius: 1.5,
        complement: false,
    }));
    std::fs::write(
        dir.join("g4_range_slices.csv"),
        curves_to_csv(&slice_curves, 6),
    )?;

    // differential passivization thresholds
    let r = ROperator::differentiator();
    let mut diff_report = serde_json::Map::new();
    for (label, g, sigma) in [
        ("g3_sigma_0.4", systems::g3(), 0.4),
        ("g3_sigma_0.6", systems::g3(), 0.6),
        ("g2_sigma_-1.0", systems::g2(), -1.0),
        ("g2_sigma_0.3", systems::g2(), 0.3),
    ] {
        let rep = genpass::gen_full_passivity(&g, sigma, &r, &grid, cfg)?;
        let _ = writeln!(summary, "differential {label}: {:?}", rep.verdict);
        diff_report.insert(label.to_string(), serde_json::to_value(&rep).unwrap());
    }
    write_json(dir, "differential_passivity.json", &diff_report)?;

    // substituted-system region export at two indices
    for sigma in [0.1, 1.0] {
        let sg3 = genpass::example2_system(&systems::g3())?;
        let band = genpass::gen_pd_band(&sg3, sigma, &ROperator::identity(), &grid, cfg)?;
        let _ = writeln!(
            summary,
            "substituted-system band of g3 at sigma = {sigma}: {}",
            if band.intervals.len() == 1 && band.intervals[0].hi.w.is_infinite() {
                "full".to_string()
            } else if band.intervals.len() == 1 && band.intervals[0].is_point() {
                "{0}".to_string()
            } else {
                format!("{} intervals", band.intervals.len())
            }
        );
        std::fs::write(
            dir.join(format!("example2_band_sigma_{sigma}.json")),
            band.to_json() + "\n",
        )?;
    }

    // conservation identity and the trade-off bound
    let mut wb = serde_json::Map::new();
    let wb_g1 = margins::waterbed_identity(&systems::g1(), 1.0, &QuadSpec::default(), cfg)?;
    let wb_g3 = margins::waterbed_identity(&systems::g3(), 2.0, &QuadSpec::default(), cfg)?;
    let bound = margins::waterbed_bound(&systems::g1(), 0.4, 10.0, 1.0, &grid, cfg)?;
    let _ = writeln!(
        summary,
        "conservation: g1 lhs = {} (err {:.1e}), g3 lhs = {} (err {:.1e}); trade-off bound {}",
        fmt_sig(wb_g1.lhs, 6),
        wb_g1.abs_error,
        fmt_sig(wb_g3.lhs, 6),
        wb_g3.abs_error,
        if bound.satisfied { "satisfied" } else { "violated" }
    );
    wb.insert("g1_a_1".into(), serde_json::to_value(wb_g1).unwrap());
    wb.insert("g3_a_2".into(), serde_json::to_value(wb_g3).unwrap());
    wb.insert("g1_bound".into(), serde_json::to_value(bound).unwrap());
    write_json(dir, "waterbed.json", &wb)?;

    // robustness of the first-order lag
    let rob = margins::robustness_distance(&systems::g1(), 1.0 / 3.0, (1e-3, 10.0), &grid, cfg)?;
    let _ = writeln!(
        summary,
        "g1 robustness over [1e-3, 10]: d_min = {} at w = {}",
        fmt_sig(rob.d_min, 6),
        fmt_sig(rob.argmin_frequency, 6)
    );
    write_json(
        dir,
        "robust_g1.json",
        &serde_json::to_value(rob).unwrap(),
    )?;

    // Nyquist data with PD-disk overlays
    for (name, g, sigmas) in [
        ("g1", systems::g1(), vec![1.0 / 3.0, 1.0]),
        ("g2", systems::g2(), vec![1.0 / 3.0]),
        ("g3", systems::g3(), vec![1.0 / 3.0]),
    ] {
        let mut rows = Vec::new();
        for w in std::iter::once(0.0).chain(grid.points()) {
            if let Ok(v) = g.eval_jw(w, cfg) {
                rows.push((w, v.re, v.im, None));
            }
        }
        let mut curves = vec![Curve {
            name: name.to_string(),
            rows,
        }];
        for s in sigmas {
            let c = 1.0 / (2.0 * s);
            curves.push(circle_curve(&crate::output::CircleOverlay {
                name: format!("pd_region_sigma_{}", fmt_sig(s, 6)),
                center: num_complex::Complex64::new(c, 0.0),
                radius: c.abs(),
                complement: s < 0.0,
            }));
        }
        std::fs::write(
            dir.join(format!("nyquist_{name}.csv")),
            curves_to_csv(&curves, 6),
        )?;
    }

    // Nichols data for the first-order lag with the gain ceiling
    let mut nichols_rows = Vec::new();
    for w in grid.points() {
        if let Ok(v) = systems::g1().eval_jw(w, cfg) {
            let bound = pdcore::nichols_bound(0.1, v.arg()).ok().flatten();
            nichols_rows.push((w, v.arg().to_degrees(), 20.0 * v.norm().log10(), bound));
        }
    }
    std::fs::write(
        dir.join("nichols_g1.csv"),
        curves_to_csv(
            &[Curve {
                name: "g1".into(),
                rows: nichols_rows,
            }],
            6,
        ),
    )?;

    std::fs::write(dir.join("summary.txt"), &summary)?;
    Ok(())
}

fn write_json(dir: &Path, name: &str, value: &impl serde::Serialize) -> CliResult<()> {
    std::fs::write(
        dir.join(name),
        serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))? + "\n",
    )?;
    Ok(())
}

/// Emit the four reference systems as reusable system files.
fn write_system_files(dir: &Path) -> CliResult<()> {
    let mut params = std::collections::BTreeMap::new();
    params.insert("tau".to_string(), systems::TAU);
    params.insert("k".to_string(), systems::K);
    params.insert("M".to_string(), systems::M);
    params.insert("d".to_string(), systems::D);
    params.insert("T".to_string(), systems::T);
    params.insert("C".to_string(), systems::C);

    let files = [
        ("g1", SystemKind::Siso, vec![vec!["1/(tau*s+k)"]]),
        ("g2", SystemKind::Siso, vec![vec!["1/(s*(M*s+d))"]]),
        ("g3", SystemKind::Siso, vec![vec!["1/((T*s+1)*(M*s+d))"]]),
        (
            "g4",
            SystemKind::Mimo,
            vec![
                vec!["1/((T*s+1)*(M*s+d))", "C/(T*s+1)"],
                vec!["C/(T*s+1)", "1/(tau*s+k)"],
            ],
        ),
    ];
    for (name, kind, entries) in files {
        let file = SystemFile {
            name: name.to_string(),
            kind,
            entries: entries
                .into_iter()
                .map(|row| row.into_iter().map(|e| SystemEntry::Expr(e.into())).collect())
                .collect(),
            parameters: params.clone(),
        };
        std::fs::write(dir.join(format!("{name}.json")), file.to_json() + "\n")?;
    }
    Ok(())
}
