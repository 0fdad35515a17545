//! Generalized passivization through a rational operator acting on the
//! output-feedback loop: H = R(s) * (1 - G sigma)^{-1} G.
//!
//! The frequency-wise PD condition becomes
//! Re(R)Re(G) - Im(R)Im(G) >= sigma |G|^2 Re(R); with R = 1 this is the
//! classical scalar check, with R = s it reduces to Im(G) <= 0 for
//! w >= 0 (negative imaginariness / differential passivity). The region
//! is frequency-parametric, so exports describe per-frequency slices.

use num_complex::Complex64;
use serde::Serialize;

use crate::bands::{self, FrequencyBand, TailSign};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::passivity::{
    self, axis_residues, PassivityReport, ResidueCheck, Verdict,
};
use crate::ratpoly::{freq_product_re_im, RationalFunction};
use crate::tol::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ROperatorKind {
    Identity,
    Differentiator,
    CustomRational,
}

/// Rational operator R(s) applied to the transformed system.
#[derive(Debug, Clone, Serialize)]
pub struct ROperator {
    pub kind: ROperatorKind,
    pub r: RationalFunction,
}

impl ROperator {
    pub fn identity() -> Self {
        ROperator {
            kind: ROperatorKind::Identity,
            r: RationalFunction::constant(1.0),
        }
    }

    pub fn differentiator() -> Self {
        ROperator {
            kind: ROperatorKind::Differentiator,
            r: RationalFunction::s(),
        }
    }

    pub fn custom(r: RationalFunction) -> Self {
        ROperator {
            kind: ROperatorKind::CustomRational,
            r,
        }
    }

    fn eval_jw(&self, w: f64, cfg: &ToleranceConfig) -> Result<Complex64> {
        let v = self.r.eval_jw(w, cfg)?;
        if v.norm() >= 1e12 {
            return Err(Error::Invalid {
                msg: format!("operator unbounded at w = {w}: |R| = {:.3e}", v.norm()),
            });
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GenCheck {
    pub holds: bool,
    /// Re(R)Re(G) - Im(R)Im(G) - sigma |G|^2 Re(R).
    pub margin: f64,
}

/// One scanned sample of the generalized condition.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GenPdSample {
    pub w: f64,
    pub re_g: f64,
    pub im_g: f64,
    pub holds: bool,
    pub margin: f64,
}

/// Generalized scalar PD check at one frequency. With the identity
/// operator the margin is computed by the same expression as the
/// classical scalar check.
pub fn gen_pd_check(
    g: &RationalFunction,
    sigma: f64,
    r: &ROperator,
    w: f64,
    cfg: &ToleranceConfig,
) -> Result<GenCheck> {
    let gv = g.eval_jw(w, cfg)?;
    let rv = r.eval_jw(w, cfg)?;
    let one_minus = Complex64::new(1.0, 0.0) - gv.scale(sigma);
    if one_minus.norm() <= cfg.singular_guard {
        return Err(Error::SingularTransform {
            msg: format!("1 - sigma*G = {one_minus} at w = {w}"),
        });
    }
    let margin = rv.re * gv.re - rv.im * gv.im - sigma * gv.norm_sqr() * rv.re;
    let scale = 1.0 + rv.norm() * gv.norm() + sigma.abs() * gv.norm_sqr() * rv.norm();
    Ok(GenCheck {
        holds: margin >= -cfg.pd_tol * scale,
        margin,
    })
}

/// Exact tail sign of the generalized margin from the leading coefficient
/// of its numerator polynomial in w.
fn gen_tail_sign(g: &RationalFunction, sigma: f64, r: &ROperator) -> TailSign {
    let (re_r, im_r) = freq_product_re_im(r.r.num(), r.r.den());
    let (re_g, im_g) = freq_product_re_im(g.num(), g.den());
    let (norm_n, _) = freq_product_re_im(g.num(), g.num());
    // margin * |Dr|^2 |Dg|^2 = ReR*ReG - ImR*ImG - sigma |Ng|^2 ReR
    let q = re_r
        .mul(&re_g)
        .sub(&im_r.mul(&im_g))
        .sub(&norm_n.mul(&re_r).scale(sigma));
    if q.is_zero() {
        return TailSign::HoldsForever;
    }
    if q.leading() > 0.0 {
        TailSign::HoldsForever
    } else {
        TailSign::FailsEventually
    }
}

/// Generalized PD frequency band; same scan mechanics as the classical
/// band.
pub fn gen_pd_band(
    g: &RationalFunction,
    sigma: f64,
    r: &ROperator,
    grid: &GridSpec,
    cfg: &ToleranceConfig,
) -> Result<FrequencyBand> {
    let tail = gen_tail_sign(g, sigma, r);
    // Raw margin: a vanishing 1 - sigma*G puts the point on the region
    // boundary where the margin is a true zero.
    bands::scan_band_with(
        |w| {
            let gv = g.eval_jw(w, cfg)?;
            let rv = r.eval_jw(w, cfg)?;
            let margin = rv.re * gv.re - rv.im * gv.im - sigma * gv.norm_sqr() * rv.re;
            let scale = rv.norm() * (gv.norm() + sigma.abs() * gv.norm_sqr());
            Ok((margin, scale))
        },
        grid,
        true,
        tail,
        cfg,
    )
}

/// The substituted system s*G(s) used by the second generalized form
/// (R = 1 with s*G replacing G).
pub fn example2_system(g: &RationalFunction) -> Result<RationalFunction> {
    g.times_s()
}

/// Scan of the generalized condition with the locus coordinates, for
/// region exports.
pub fn gen_pd_samples(
    g: &RationalFunction,
    sigma: f64,
    r: &ROperator,
    grid: &GridSpec,
    cfg: &ToleranceConfig,
) -> Result<Vec<GenPdSample>> {
    let mut out = Vec::new();
    for w in std::iter::once(0.0).chain(grid.points()) {
        match (g.eval_jw(w, cfg), gen_pd_check(g, sigma, r, w, cfg)) {
            (Ok(gv), Ok(chk)) => out.push(GenPdSample {
                w,
                re_g: gv.re,
                im_g: gv.im,
                holds: chk.holds,
                margin: chk.margin,
            }),
            (Err(e), _) if e.is_pole() => continue,
            (_, Err(e)) if e.is_pole() => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    Ok(out)
}

/// Per-frequency slice geometry of the generalized PD region.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case", tag = "shape")]
pub enum SliceBoundary {
    /// |z - center| <= radius.
    Disk {
        center_re: f64,
        center_im: f64,
        radius: f64,
    },
    /// |z - center| >= radius.
    DiskComplement {
        center_re: f64,
        center_im: f64,
        radius: f64,
    },
    /// a*Re(z) + b*Im(z) >= 0.
    HalfPlane { a: f64, b: f64 },
    /// Condition degenerates to an identity at this frequency.
    AllPlane,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GenRegionSlice {
    pub w: f64,
    pub boundary: SliceBoundary,
}

/// Slice of {z : Re(R)Re(z) - Im(R)Im(z) >= sigma |z|^2 Re(R)} at a
/// fixed frequency. For sigma*Re(R) > 0 this is a disk through the
/// origin with center (1 - j ImR/ReR)/(2 sigma); for negative products a
/// disk complement; for Re(R) = 0 a half-plane.
pub fn gen_region_slice(
    sigma: f64,
    r: &ROperator,
    w: f64,
    cfg: &ToleranceConfig,
) -> Result<GenRegionSlice> {
    let rv = r.eval_jw(w, cfg)?;
    let boundary = if rv.re == 0.0 && rv.im == 0.0 {
        SliceBoundary::AllPlane
    } else if rv.re == 0.0 || sigma == 0.0 {
        // linear condition: ReR*Re(z) - ImR*Im(z) >= 0
        if rv.re == 0.0 && rv.im == 0.0 {
            SliceBoundary::AllPlane
        } else {
            SliceBoundary::HalfPlane {
                a: rv.re,
                b: -rv.im,
            }
        }
    } else {
        let t = rv.im / rv.re;
        let center = Complex64::new(1.0, -t) / (2.0 * sigma);
        let radius = center.norm();
        if sigma * rv.re > 0.0 {
            SliceBoundary::Disk {
                center_re: center.re,
                center_im: center.im,
                radius,
            }
        } else {
            SliceBoundary::DiskComplement {
                center_re: center.re,
                center_im: center.im,
                radius,
            }
        }
    };
    Ok(GenRegionSlice { w, boundary })
}

/// Full passivity verdict for the differentiator operator: the
/// generalized PD condition over the scan, winding/forbidden-point checks
/// of G around (1/sigma, 0), and axis residues of s*H.
pub fn gen_full_passivity(
    g: &RationalFunction,
    sigma: f64,
    r: &ROperator,
    grid: &GridSpec,
    cfg: &ToleranceConfig,
) -> Result<PassivityReport> {
    if r.kind != ROperatorKind::Differentiator {
        return Err(Error::Invalid {
            msg: "full generalized passivity is defined for the differentiator operator".into(),
        });
    }
    if !g.is_strictly_proper() {
        return Err(Error::NotStrictlyProper);
    }
    let cls = g.classify(cfg)?;
    let mut warnings = cls.warnings.clone();

    let sweep = passivity::margin_sweep(
        |w| Ok(gen_pd_check(g, sigma, r, w, cfg)?.margin),
        grid,
        cfg.boundary_margin,
        cfg,
    )?;

    let mut forbidden_point_hit = false;
    let mut winding = None;
    if sigma != 0.0 {
        let fp = Complex64::new(1.0 / sigma, 0.0);
        let fp_sweep = passivity::margin_sweep(
            |w| Ok((g.eval_jw(w, cfg)? - fp).norm()),
            grid,
            f64::MAX,
            cfg,
        )?;
        if fp_sweep.min_margin <= cfg.boundary_margin * (1.0 + fp.norm()) {
            forbidden_point_hit = true;
        } else {
            match passivity::detoured_winding_detail(g, fp, grid, cfg) {
                Ok(detail) => winding = Some(detail.winding),
                Err(Error::CurveThroughPoint { .. }) => forbidden_point_hit = true,
                Err(Error::WindingResidual { residual }) => {
                    warnings.push(format!("winding residual {residual:.3} too large"));
                }
                Err(e) => return Err(e),
            }
        }
    }

    // H^D = s * N / (D - sigma N)
    let h = g.of_transform(sigma)?;
    let hd = h.times_s()?;
    let (residues, repeated_axis_pole): (Vec<ResidueCheck>, bool) = match axis_residues(&hd, cfg) {
        Ok(res) => (res, false),
        Err(Error::RepeatedAxisPole { frequency }) => {
            warnings.push(format!("repeated imaginary-axis pole near w = {frequency}"));
            (Vec::new(), true)
        }
        Err(e) => return Err(e),
    };

    let stability_ok = match winding {
        Some(n) => n == cls.unstable_pole_count as i32,
        None if sigma == 0.0 => cls.unstable_pole_count == 0,
        None => false,
    };
    let containment_ok = sweep.violations.is_empty();
    let residues_ok = residues.iter().all(|r| r.ok);

    let verdict = if !containment_ok
        || repeated_axis_pole
        || !residues_ok
        || (winding.is_some() && !stability_ok)
        || (sigma == 0.0 && cls.unstable_pole_count > 0)
    {
        Verdict::NotPassive
    } else if forbidden_point_hit || (sigma != 0.0 && winding.is_none()) {
        Verdict::Inconclusive
    } else {
        Verdict::Passive
    };

    Ok(PassivityReport {
        verdict,
        winding_number: winding,
        unstable_poles: cls.unstable_pole_count,
        containment_violations: sweep.violations,
        min_margin: sweep.min_margin,
        min_margin_frequency: sweep.min_margin_frequency,
        forbidden_point_hit,
        axis_pole_residues: residues,
        oracle_verdict: None,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pdcore;
    use crate::systems;
    use approx::assert_relative_eq;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn grid() -> GridSpec {
        GridSpec::default_band()
    }

    #[test]
    fn identity_operator_matches_siso_check() {
        let g3 = systems::g3();
        let r = ROperator::identity();
        let chk = gen_pd_check(&g3, 1.0 / 3.0, &r, 5.0, &cfg()).unwrap();
        let siso = pdcore::pd_check_siso(&g3, 1.0 / 3.0, 5.0, &cfg()).unwrap();
        assert!(chk.holds);
        assert!((chk.margin - siso.margin).abs() <= 1e-12);
    }

    #[test]
    fn differentiator_reduces_to_negative_imaginariness() {
        // R = s at w = 1: margin = -Im(G2(j1)) > 0
        let g2 = systems::g2();
        let r = ROperator::differentiator();
        let chk = gen_pd_check(&g2, 0.7, &r, 1.0, &cfg()).unwrap();
        assert!(chk.holds);
        let gv = g2.eval_jw(1.0, &cfg()).unwrap();
        assert_relative_eq!(chk.margin, -gv.im, max_relative = 1e-12);
    }

    #[test]
    fn example2_condition_numeric() {
        // R = 1 applied to s*G: margin at w equals
        // -w Im(G) - sigma w^2 |G|^2
        let g3 = systems::g3();
        let sg = example2_system(&g3).unwrap();
        let r = ROperator::identity();
        let w = 1.0;
        let sigma = 0.1;
        let chk = gen_pd_check(&sg, sigma, &r, w, &cfg()).unwrap();
        let gv = g3.eval_jw(w, &cfg()).unwrap();
        let expect = -w * gv.im - sigma * w * w * gv.norm_sqr();
        assert_relative_eq!(chk.margin, expect, max_relative = 1e-12);
        assert!(chk.holds);
    }

    #[test]
    fn band_differentiator_full_for_g3() {
        // Im(G3) <= 0 for all w >= 0; Re(R) = 0 removes the sigma term
        let band = gen_pd_band(
            &systems::g3(),
            0.4,
            &ROperator::differentiator(),
            &grid(),
            &cfg(),
        )
        .unwrap();
        assert_eq!(band.intervals.len(), 1);
        assert_eq!(band.intervals[0].lo.w, 0.0);
        assert!(band.intervals[0].hi.w.is_infinite());
    }

    #[test]
    fn band_identity_matches_classical() {
        let band_gen = gen_pd_band(
            &systems::g3(),
            1.0 / 3.0,
            &ROperator::identity(),
            &grid(),
            &cfg(),
        )
        .unwrap();
        let band_classical = bands::pd_band(
            &crate::ratpoly::RationalMatrix::from_scalar(systems::g3()),
            &pdcore::PassivityIndex::scalar(1.0 / 3.0),
            &grid(),
            bands::BandMode::SisoExact,
            &cfg(),
        )
        .unwrap();
        let e1 = band_gen.upper_edge().unwrap();
        let e2 = band_classical.upper_edge().unwrap();
        assert_relative_eq!(e1, e2, max_relative = 1e-9);
    }

    #[test]
    fn example2_large_sigma_collapses_band() {
        // s*G3 with sigma = 1.0: fails for every w > 0, holds at w = 0
        let sg = example2_system(&systems::g3()).unwrap();
        let band = gen_pd_band(&sg, 1.0, &ROperator::identity(), &grid(), &cfg()).unwrap();
        assert_eq!(band.intervals.len(), 1);
        assert!(band.intervals[0].is_point());
        assert_eq!(band.intervals[0].lo.w, 0.0);
    }

    #[test]
    fn example2_small_sigma_full_band() {
        let sg = example2_system(&systems::g3()).unwrap();
        let band = gen_pd_band(&sg, 0.1, &ROperator::identity(), &grid(), &cfg()).unwrap();
        assert_eq!(band.intervals.len(), 1);
        assert!(band.intervals[0].hi.w.is_infinite());
    }

    #[test]
    fn gen_full_passivity_g3_threshold() {
        // encirclement of (1/sigma, 0) flips as sigma crosses d = 0.5
        let ok = gen_full_passivity(
            &systems::g3(),
            0.4,
            &ROperator::differentiator(),
            &grid(),
            &cfg(),
        )
        .unwrap();
        assert_eq!(ok.verdict, Verdict::Passive);

        let bad = gen_full_passivity(
            &systems::g3(),
            0.6,
            &ROperator::differentiator(),
            &grid(),
            &cfg(),
        )
        .unwrap();
        assert_eq!(bad.verdict, Verdict::NotPassive);
        assert_eq!(bad.winding_number, Some(-1));
    }

    #[test]
    fn gen_full_passivity_g2_needs_negative_inverse_index() {
        let ok = gen_full_passivity(
            &systems::g2(),
            -1.0,
            &ROperator::differentiator(),
            &grid(),
            &cfg(),
        )
        .unwrap();
        assert_eq!(ok.verdict, Verdict::Passive);

        let bad = gen_full_passivity(
            &systems::g2(),
            0.3,
            &ROperator::differentiator(),
            &grid(),
            &cfg(),
        )
        .unwrap();
        assert_eq!(bad.verdict, Verdict::NotPassive);
    }

    #[test]
    fn example2_thresholds_for_both_candidate_systems() {
        // The substituted-system condition for w > 0 reduces to
        // sigma <= d for the double-integrator chain and
        // sigma <= M + T*d for the filtered swing dynamics; both system
        // readings of the case study are evaluated here rather than
        // hard-coding either.
        let r = ROperator::identity();
        let cases = [
            (systems::g2(), systems::D),            // 0.5
            (systems::g3(), systems::M + systems::T * systems::D), // 0.31
        ];
        for (g, threshold) in cases {
            let sg = example2_system(&g).unwrap();
            for sigma in [0.1, 0.3, 0.5, 1.0] {
                let band = gen_pd_band(&sg, sigma, &r, &grid(), &cfg()).unwrap();
                let full = band.intervals.len() == 1 && band.intervals[0].hi.w.is_infinite();
                assert_eq!(
                    full,
                    sigma <= threshold + 1e-12,
                    "sigma {sigma} vs threshold {threshold}"
                );
            }
        }
    }

    #[test]
    fn slice_geometry_example2() {
        // R = 1, sigma > 0: disk centered on the real axis; the
        // substituted-system view at frequency w corresponds to the disk
        // |z + j/(2 sigma w)| <= 1/(2 sigma w) in original coordinates;
        // here we check the generic slice for R = s instead:
        // Re(R) = 0 gives the half-plane Im(z) <= 0.
        let s = gen_region_slice(0.5, &ROperator::differentiator(), 2.0, &cfg()).unwrap();
        match s.boundary {
            SliceBoundary::HalfPlane { a, b } => {
                assert_eq!(a, 0.0);
                assert!(b < 0.0);
            }
            other => panic!("unexpected slice {other:?}"),
        }
        let disk = gen_region_slice(0.5, &ROperator::identity(), 2.0, &cfg()).unwrap();
        match disk.boundary {
            SliceBoundary::Disk {
                center_re, radius, ..
            } => {
                assert_relative_eq!(center_re, 1.0, max_relative = 1e-12);
                assert_relative_eq!(radius, 1.0, max_relative = 1e-12);
            }
            other => panic!("unexpected slice {other:?}"),
        }
    }
}
