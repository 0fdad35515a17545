//! Acceptance suite: one test per criterion, each printing a pass line.
//! Every tolerance is pinned here; a failing criterion fails its test.

mod common;

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;

use pdregion::bands::{self, BandMode};
use pdregion::genpass::{self, ROperator};
use pdregion::margins::{self, QuadSpec};
use pdregion::passivity::{self, Verdict};
use pdregion::pdcore::{self, PassivityIndex};
use pdregion::systems;
use pdregion::{GridSpec, RationalMatrix, ToleranceConfig};

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn pass(n: u32, what: &str) {
    println!("acceptance criterion {n}: PASS - {what}");
}

fn g3m() -> RationalMatrix {
    RationalMatrix::from_scalar(systems::g3())
}

fn g3_edge(sigma: f64) -> f64 {
    ((systems::D - sigma) / (systems::T * systems::M)).sqrt()
}

#[test]
fn criterion_01_critical_frequency_table() {
    let started = Instant::now();
    let cfg = cfg();
    let cases = [
        (-0.5, 13.1826, 112),
        (-0.2, 10.9648, 104),
        (0.0, 9.3325, 97),
        (0.2, 7.0795, 85),
    ];
    for (sigma, printed, k) in cases {
        let w = bands::first_failing_grid_point(&g3m(), sigma, 0.01, &cfg).unwrap();
        let exact_grid_value = 10f64.powf(k as f64 / 100.0);
        assert!(
            (w - exact_grid_value).abs() <= 1e-12 * exact_grid_value,
            "sigma {sigma}: {w} is not the grid value 10^({k}/100)"
        );
        assert!(
            (w - printed).abs() < 5e-5,
            "sigma {sigma}: {w} does not print as {printed}"
        );
    }
    // sigma = 0.5 collapses the band to the single point {0}
    let band = bands::pd_band(
        &g3m(),
        &PassivityIndex::scalar(0.5),
        &GridSpec::default_band(),
        BandMode::SisoExact,
        &cfg,
    )
    .unwrap();
    assert_eq!(band.intervals.len(), 1);
    assert_eq!(band.intervals[0].lo.w, 0.0);
    assert_eq!(band.intervals[0].hi.w, 0.0);

    // refined analytic edges
    for sigma in [-0.5, -0.2, 0.0, 0.2] {
        let band = bands::pd_band(
            &g3m(),
            &PassivityIndex::scalar(sigma),
            &GridSpec::default_band(),
            BandMode::SisoExact,
            &cfg,
        )
        .unwrap();
        let edge = band.upper_edge().unwrap();
        let expect = g3_edge(sigma);
        assert!(
            (edge - expect).abs() <= 1e-6 * expect,
            "sigma {sigma}: refined edge {edge} vs analytic {expect}"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    pass(1, "critical-frequency table at 0.01-decade grid, refined edges, runtime");
}

#[test]
fn criterion_02_g3_band_edge_at_one_third() {
    let cfg = cfg();
    let band = bands::pd_band(
        &g3m(),
        &PassivityIndex::scalar(1.0 / 3.0),
        &GridSpec::default_band(),
        BandMode::SisoExact,
        &cfg,
    )
    .unwrap();
    let edge = band.upper_edge().unwrap();
    assert!(
        (edge - 5.27046).abs() <= 1e-5,
        "refined edge {edge} vs 5.27046"
    );
    let grid_point = bands::first_failing_grid_point(&g3m(), 1.0 / 3.0, 0.01, &cfg).unwrap();
    assert!((grid_point - 5.3703).abs() < 5e-5, "grid point {grid_point}");
    pass(2, "G3 at sigma = 1/3: refined edge 5.27046, grid point 5.3703");
}

#[test]
fn criterion_03_g1_passivization_with_oracle() {
    let cfg = cfg();
    let grid = GridSpec::default_band();
    let ok = passivity::of_passivity_check(&systems::g1(), 1.0 / 3.0, &grid, &cfg).unwrap();
    assert_eq!(ok.verdict, Verdict::Passive);
    let oracle_ok = passivity::oracle_of_passivity(&systems::g1(), 1.0 / 3.0, &grid, &cfg).unwrap();
    assert!(oracle_ok.stable && oracle_ok.min_real_part >= -1e-9);

    let bad = passivity::of_passivity_check(&systems::g1(), 1.0, &grid, &cfg).unwrap();
    assert_eq!(bad.verdict, Verdict::NotPassive);
    let oracle_bad = passivity::oracle_of_passivity(&systems::g1(), 1.0, &grid, &cfg).unwrap();
    assert!(!oracle_bad.stable);
    pass(3, "G1 passive at sigma = 1/3, not passive at sigma = 1, oracle agrees");
}

#[test]
fn criterion_04_g2_band_and_residue() {
    let cfg = cfg();
    let g2 = RationalMatrix::from_scalar(systems::g2());
    for sigma in [0.0, 0.1, 1.0] {
        let band = bands::pd_band(
            &g2,
            &PassivityIndex::scalar(sigma),
            &GridSpec::default_band(),
            BandMode::SisoExact,
            &cfg,
        )
        .unwrap();
        assert!(band.is_empty(), "sigma {sigma}: band not empty");
        assert!(band.zero_excluded_pole);
    }
    let residues = passivity::axis_residues(&systems::g2(), &cfg).unwrap();
    assert_eq!(residues.len(), 1);
    assert!((residues[0].residue.re - 2.0).abs() <= 1e-9);
    assert!(residues[0].ok);
    pass(4, "G2 band empty for sigma in {0, 0.1, 1}; residue at origin = 2");
}

#[test]
fn criterion_05_g4_mimo_necessary_band() {
    let cfg = cfg();
    let g4 = systems::g4();
    let sigma = PassivityIndex::identity_scaled(2, 1.0 / 3.0);
    // Fig-4 sampling: log w from -3 to 2, step 0.1
    let grid = GridSpec::log(1e-3, 1e2, 10).unwrap();

    let hold = pdcore::pd_check_mimo_necessary(&g4, &sigma, 10f64.powf(0.3), 64, &cfg).unwrap();
    assert!(hold.holds, "necessary check must hold at 10^0.3");
    let fail = pdcore::pd_check_mimo_necessary(&g4, &sigma, 10f64.powf(0.7), 64, &cfg).unwrap();
    assert!(!fail.holds, "necessary check must fail at 10^0.7");

    for w in grid.points() {
        let exact = pdcore::pd_check_mimo_exact(&g4, &sigma, w, &cfg).unwrap();
        let nec = pdcore::pd_check_mimo_necessary(&g4, &sigma, w, 64, &cfg).unwrap();
        if exact.holds {
            assert!(nec.holds, "exact holds but necessary fails at w = {w}");
        }
    }
    pass(5, "G4 necessary check: holds at 10^0.3, fails at 10^0.7, exact implies necessary");
}

#[test]
fn criterion_06_differential_passivity_threshold() {
    let cfg = cfg();
    let grid = GridSpec::default_band();
    let r = ROperator::differentiator();
    let ok = genpass::gen_full_passivity(&systems::g3(), 0.4, &r, &grid, &cfg).unwrap();
    assert_eq!(ok.verdict, Verdict::Passive);
    let bad = genpass::gen_full_passivity(&systems::g3(), 0.6, &r, &grid, &cfg).unwrap();
    assert_eq!(bad.verdict, Verdict::NotPassive);
    pass(6, "differential passivity of G3: passive at 0.4, not passive at 0.6");
}

#[test]
fn criterion_07_waterbed_identity() {
    let cfg = cfg();
    let quad = QuadSpec::default();
    let named = [
        (systems::g1(), 1.0, 0.5),
        (systems::g3(), 2.0, 0.5),
        (
            pdregion::tfparse::parse_expression("1/(s+1)").unwrap(),
            1.0,
            1.0,
        ),
    ];
    for (g, a, expect_lhs) in named {
        let r = margins::waterbed_identity(&g, a, &quad, &cfg).unwrap();
        assert!((r.lhs - expect_lhs).abs() <= 1e-9, "lhs {}", r.lhs);
        assert!(r.abs_error <= 1e-6, "error {}", r.abs_error);
    }
    let mut rng = common::rng(0xacc_0007);
    let mut done = 0;
    while done < 50 {
        let rel = rng.random_range(1..=3usize);
        let den_deg = rel + rng.random_range(0..=2usize);
        let g = common::random_min_phase_siso(&mut rng, rel, den_deg.max(rel));
        for a in [0.5, 1.0, 2.0] {
            let r = margins::waterbed_identity(&g, a, &quad, &cfg).unwrap();
            assert!(
                r.abs_error <= 1e-6,
                "system {done}: error {} at a = {a}",
                r.abs_error
            );
        }
        done += 1;
    }
    pass(7, "conservation identity within 1e-6 on named and 50 random systems");
}

#[test]
fn criterion_08_property_suites() {
    let cfg = cfg();
    // disk/inequality algebraic equivalence at 1e-12
    let mut rng = common::rng(0xacc_0008);
    for _ in 0..2000 {
        let z = Complex64::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let sigma: f64 = rng.random_range(0.01..10.0);
        let c = 1.0 / (2.0 * sigma);
        let lhs = sigma * (c * c - (z - Complex64::new(c, 0.0)).norm_sqr());
        let rhs = z.re - sigma * z.norm_sqr();
        assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + z.norm_sqr() * sigma + z.norm()));
    }

    // exact implies necessary on 500 random MIMO samples; half of them
    // diagonally dominant with a small index so both outcomes appear
    let mut positives = 0;
    for trial in 0..500 {
        let p = if trial % 2 == 0 { 2 } else { 3 };
        let (m, sigma) = if trial % 2 == 1 {
            let mut m = common::random_complex_matrix(&mut rng, p).scale(Complex64::new(0.3, 0.0));
            for i in 0..p {
                m.set(i, i, m.get(i, i) + Complex64::new(1.8, 0.0));
            }
            (m, PassivityIndex::identity_scaled(p, rng.random_range(0.01..0.2)))
        } else {
            (
                common::random_complex_matrix(&mut rng, p),
                common::random_spd_index(&mut rng, p, &cfg),
            )
        };
        let (Ok(exact), Ok(nec)) = (
            pdcore::pd_check_mimo_exact_value(&m, &sigma, &cfg),
            pdcore::pd_check_mimo_necessary_value(&m, &sigma, 64, &cfg),
        ) else {
            continue;
        };
        if exact.holds {
            positives += 1;
            assert!(nec.holds, "exact => necessary failed at trial {trial}");
        }
    }
    assert!(positives >= 20);

    // contraction on 200 random SISO systems
    let grid = GridSpec::log(1e-2, 1e2, 16).unwrap();
    for trial in 0..200 {
        let g = RationalMatrix::from_scalar(common::random_stable_siso(&mut rng, 5));
        let s1 = rng.random_range(0.01..1.0);
        let s2 = s1 + rng.random_range(0.05..1.0);
        let r = bands::contraction_check(
            &g,
            &PassivityIndex::scalar(s1),
            &PassivityIndex::scalar(s2),
            &grid,
            &cfg,
        )
        .unwrap();
        assert!(r.contained, "contraction failed at trial {trial}");
    }

    // Schur-block agreement whenever sigma > 0
    for trial in 0..200 {
        let p = 2;
        let mut m = common::random_complex_matrix(&mut rng, p);
        if trial % 3 == 0 {
            for i in 0..p {
                m.set(i, i, m.get(i, i) + Complex64::new(2.0, 0.0));
            }
        }
        let sigma = common::random_spd_index(&mut rng, p, &cfg);
        let (Ok(exact), Ok(schur)) = (
            pdcore::pd_check_mimo_exact_value(&m, &sigma, &cfg),
            pdcore::schur_block_check_value(&m, &sigma, &cfg),
        ) else {
            continue;
        };
        if exact.lambda_min_value.abs() > 1e-7 * (1.0 + m.max_row_sum_norm()) {
            assert_eq!(exact.holds, schur, "Schur disagreement at trial {trial}");
        }
    }

    // Mobius circle preservation residual <= 1e-7
    for _ in 0..50 {
        let center = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let radius = rng.random_range(0.1..3.0);
        let sigma: f64 = if rng.random_bool(0.5) {
            rng.random_range(0.05..2.0)
        } else {
            -rng.random_range(0.05..2.0)
        };
        let pole = Complex64::new(1.0 / sigma, 0.0);
        if ((center - pole).norm() - radius).abs() <= 0.3 {
            continue;
        }
        let mapped: Vec<Complex64> = (0..200)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 200.0;
                let z = center + Complex64::from_polar(radius, th);
                z / (Complex64::new(1.0, 0.0) - z.scale(sigma))
            })
            .collect();
        assert!(circle_or_line_residual(&mapped) <= 1e-7);
    }

    // Nichols/disk pointwise equivalence at 1e-9
    for _ in 0..2000 {
        let sigma: f64 = rng.random_range(0.05..5.0);
        let phase: f64 = rng.random_range(-1.5..1.5);
        let mag_db: f64 = rng.random_range(-40.0..40.0);
        let bound = pdcore::nichols_bound(sigma, phase).unwrap().unwrap();
        let z = Complex64::from_polar(10f64.powf(mag_db / 20.0), phase);
        let region = pdcore::pd_region(
            &PassivityIndex::scalar(sigma),
            pdcore::PassivizationMode::Of,
        );
        if (bound - mag_db).abs() > 1e-9 {
            assert_eq!(
                mag_db <= bound,
                pdcore::region_contains(&region, z, 1e-12)
            );
        }
    }

    // numerical radius sandwich on random triangular-similar matrices
    for _ in 0..30 {
        let p = rng.random_range(2..=4);
        let q = common::random_unitary(&mut rng, p);
        let mut t = pdregion::cmatrix::CMatrix::zeros(p);
        let mut spectral_radius: f64 = 0.0;
        for i in 0..p {
            for j in i..p {
                let v = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                t.set(i, j, v);
                if i == j {
                    spectral_radius = spectral_radius.max(v.norm());
                }
            }
        }
        let m = q.mul(&t).mul(&q.adjoint());
        let w = pdregion::hermlin::numerical_radius(&m);
        let two_norm = pdregion::hermlin::HermitianMatrix::hermitian_part(&m.adjoint().mul(&m))
            .lambda_max()
            .max(0.0)
            .sqrt();
        assert!(w >= spectral_radius - 1e-9 && w <= two_norm + 1e-9);
    }
    pass(8, "property suites: disk identity, exact=>necessary, contraction, Schur, Mobius, Nichols, radius bounds");
}

fn circle_or_line_residual(points: &[Complex64]) -> f64 {
    let scale = points.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let pts: Vec<Complex64> = points.iter().map(|p| p.scale(1.0 / scale)).collect();
    let mut normal = [[0.0f64; 4]; 4];
    for p in &pts {
        let row = [p.norm_sqr(), p.re, p.im, 1.0];
        for i in 0..4 {
            for j in 0..4 {
                normal[i][j] += row[i] * row[j];
            }
        }
    }
    let flat: Vec<f64> = normal.iter().flatten().copied().collect();
    let eig = pdregion::hermlin::HermitianMatrix::from_real_sym(&flat, 4).eig();
    let v = eig.vector(0);
    let coef: Vec<f64> = v.iter().map(|c| c.re).collect();
    let nrm = coef.iter().map(|c| c * c).sum::<f64>().sqrt();
    pts.iter()
        .map(|p| (coef[0] * p.norm_sqr() + coef[1] * p.re + coef[2] * p.im + coef[3]).abs() / nrm)
        .fold(0.0, f64::max)
}

#[test]
fn criterion_09_robustness_of_passivization() {
    let cfg = cfg();
    let grid = GridSpec::log(1e-2, 20.0, 40).unwrap();
    let range = (1e-2, 20.0);
    let mut rng = common::rng(0xacc_0009);

    for nominal in 0..20 {
        // strictly passive (finite-range) first-order nominal
        let k = rng.random_range(0.5..2.0);
        let tau = rng.random_range(0.05..0.5);
        let g0 = pdregion::RationalFunction::new(
            pdregion::Polynomial::constant(k),
            pdregion::Polynomial::new(vec![1.0, tau]),
        )
        .unwrap();
        let sigma = rng.random_range(0.3..0.8) / k;
        let rob = margins::robustness_distance(&g0, sigma, range, &grid, &cfg).unwrap();
        assert!(rob.d_min > 1e-4, "nominal {nominal}: d_min = {}", rob.d_min);
        let c = Complex64::new(1.0 / (2.0 * sigma), 0.0);
        let r = c.re;

        // 100 random admissible perturbations at 0.9 d_min stay inside
        let delta = 0.9 * rob.d_min;
        for _ in 0..100 {
            let p: f64 = 10f64.powf(rng.random_range(-2.0..2.0));
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            // first-order low-pass with H-infinity norm exactly delta
            let d_num = sign * delta;
            for &w in grid.points().iter() {
                let gv = g0.eval_jw(w, &cfg).unwrap();
                let dv = Complex64::new(d_num, 0.0) / Complex64::new(1.0, w / p);
                assert!(
                    (gv + dv - c).norm() <= r + 1e-9,
                    "nominal {nominal}: admissible perturbation escaped at w = {w}"
                );
            }
        }

        // adversarial all-pass at 1.5 d_min aligned at the argmin escapes
        let delta_bad = 1.5 * rob.d_min;
        let w_star = rob.argmin_frequency;
        let gv = g0.eval_jw(w_star, &cfg).unwrap();
        let v = (gv - c) / (gv - c).norm();
        let phi = v.arg();
        let adv = |w: f64| -> Complex64 {
            // delta_bad * e^{j phase(w)} with phase(w_star) = phi, built
            // from a real stable all-pass (c1 - s)/(c1 + s) or constants
            if phi.abs() < 1e-12 {
                Complex64::new(delta_bad, 0.0)
            } else if (phi.abs() - std::f64::consts::PI).abs() < 1e-12 {
                Complex64::new(-delta_bad, 0.0)
            } else if phi < 0.0 {
                let c1 = w_star / (-phi / 2.0).tan();
                let ap = (Complex64::new(c1, -w) ) / (Complex64::new(c1, w));
                ap.scale(delta_bad)
            } else {
                let c1 = w_star / ((std::f64::consts::PI - phi) / 2.0).tan();
                let ap = (Complex64::new(c1, -w)) / (Complex64::new(c1, w));
                ap.scale(-delta_bad)
            }
        };
        let perturbed = gv + adv(w_star);
        assert!(
            (perturbed - c).norm() > r,
            "nominal {nominal}: adversarial perturbation failed to escape (d_min = {})",
            rob.d_min
        );
        // sanity: the adversarial family really has H-infinity norm delta_bad
        for &w in &[1e-2, w_star, 1e2] {
            assert!((adv(w).norm() - delta_bad).abs() <= 1e-9 * delta_bad);
        }
    }
    pass(9, "robustness: 0.9 d_min perturbations stay inside, adversarial 1.5 d_min escapes");
}
