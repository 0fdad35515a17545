//! Randomized corpus agreement between the geometric passivity check and
//! the brute-force oracle on the closed-loop denominator.

mod common;

use num_complex::Complex64;
use rand::Rng;

use pdregion::passivity::{self, Verdict};
use pdregion::{GridSpec, ToleranceConfig};

#[test]
fn geometric_check_agrees_with_oracle_on_corpus() {
    let cfg = ToleranceConfig::default();
    let grid = GridSpec::log(1e-3, 1e3, 40).unwrap();
    let mut rng = common::rng(0xc0_5eed);
    let mut passive_seen = 0;
    let mut rejected_seen = 0;

    for trial in 0..200 {
        let g = common::random_stable_siso(&mut rng, 5);
        let sigma: f64 = rng.random_range(-2.0..2.0);
        if sigma.abs() < 1e-3 {
            continue;
        }
        let report = match passivity::of_passivity_check(&g, sigma, &grid, &cfg) {
            Ok(r) => r,
            // curve through the test point or an unresolvable winding is
            // a legitimate refusal, not a verdict
            Err(_) => continue,
        };
        let oracle = passivity::oracle_of_passivity(&g, sigma, &grid, &cfg).unwrap();

        match report.verdict {
            Verdict::Passive => {
                passive_seen += 1;
                assert!(
                    oracle.stable,
                    "trial {trial}: verdict passive but closed-loop roots unstable (sigma={sigma})"
                );
                assert!(
                    oracle.min_real_part >= -1e-7,
                    "trial {trial}: verdict passive but min Re H = {} (sigma={sigma})",
                    oracle.min_real_part
                );
            }
            Verdict::NotPassive => {
                rejected_seen += 1;
                if let Some(&w) = report.containment_violations.first() {
                    // PD violation at the witness frequency must show up
                    // as negative damping of H there
                    let h = g.of_transform(sigma).unwrap();
                    if let Ok(v) = h.eval_jw(w, &cfg) {
                        assert!(
                            v.re < 1e-7,
                            "trial {trial}: witness w = {w} has Re H = {} (sigma={sigma})",
                            v.re
                        );
                    }
                }
            }
            Verdict::Inconclusive => {}
        }
    }
    assert!(passive_seen >= 10, "only {passive_seen} passive cases sampled");
    assert!(rejected_seen >= 10, "only {rejected_seen} rejected cases sampled");
}

#[test]
fn winding_symmetry_doubling_matches_full_sweep() {
    let cfg = ToleranceConfig::default();
    let grid = GridSpec::log(1e-3, 1e3, 40).unwrap();
    let mut rng = common::rng(0xf0_11);
    let mut compared = 0;
    for _ in 0..60 {
        let g = common::random_stable_siso(&mut rng, 4);
        let point = Complex64::new(rng.random_range(-4.0..4.0), 0.0);
        let sym = passivity::winding_number(&g, point, &grid, &cfg);
        let full = passivity::winding_full_sweep(&g, point, &grid, &cfg);
        if let (Ok(a), Ok(b)) = (sym, full) {
            assert_eq!(a, b, "system {g:?} point {point}");
            compared += 1;
        }
    }
    assert!(compared >= 40);
}

#[test]
fn winding_residuals_stay_small_on_corpus() {
    let cfg = ToleranceConfig::default();
    let grid = GridSpec::log(1e-3, 1e3, 40).unwrap();
    let mut rng = common::rng(0xf0_22);
    let mut checked = 0;
    for _ in 0..100 {
        let g = common::random_stable_siso(&mut rng, 5);
        let point = Complex64::new(rng.random_range(-4.0..4.0), 0.0);
        match passivity::winding_detail(&g, point, &grid, &cfg) {
            Ok(d) => {
                assert!(d.residual < 0.05, "residual {} for {g:?}", d.residual);
                checked += 1;
            }
            Err(_) => continue,
        }
    }
    assert!(checked >= 60);
}
