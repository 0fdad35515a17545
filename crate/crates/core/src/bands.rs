//! PD frequency bands: grid scan plus bisection-refined edges.
//!
//! A band is the set of frequencies where the selected PD check holds.
//! Grid points that land on poles are skipped and flagged; w = 0 is
//! always sampled explicitly and excluded (with a flag) when it is a
//! pole. Edges between a holding and a failing sample are refined by
//! bisection on the signed margin where the margin is continuous
//! (siso_exact, mimo_exact, if); the estimated MIMO band keeps grid
//! resolution. Narrow PD intervals below one grid step can be missed;
//! that is a documented limitation of the scan.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::hermlin::HermitianMatrix;
use crate::pdcore::{self, PassivityIndex};
use crate::ratpoly::{freq_product_re_im, RationalMatrix};
use crate::tol::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BandMode {
    SisoExact,
    MimoExact,
    MimoEstimated,
    If,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// Bisection-refined crossing of the margin.
    Refined,
    /// Limited by grid resolution (or by the scan window).
    GridLimited,
    /// The check provably keeps its sign beyond the scanned window.
    Asymptotic,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BandEdge {
    /// Edge frequency; +infinity is serialized as null.
    #[serde(serialize_with = "crate::serdeutil::freq_or_unbounded")]
    pub w: f64,
    pub kind: EdgeKind,
    /// Margin at the edge (near zero for refined edges).
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BandInterval {
    pub lo: BandEdge,
    pub hi: BandEdge,
}

impl BandInterval {
    pub fn contains(&self, w: f64) -> bool {
        w >= self.lo.w && w <= self.hi.w
    }

    pub fn is_point(&self) -> bool {
        self.lo.w == self.hi.w
    }
}

/// Finite union of closed intervals on [0, inf).
#[derive(Debug, Clone, Serialize)]
pub struct FrequencyBand {
    pub intervals: Vec<BandInterval>,
    pub grid: GridSpec,
    pub refined: bool,
    /// Grid points skipped because they are poles.
    pub skipped_pole_points: Vec<f64>,
    /// w = 0 was a pole and is excluded from the band.
    pub zero_excluded_pole: bool,
}

impl FrequencyBand {
    pub fn contains(&self, w: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(w))
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Largest finite edge, if the band is nonempty.
    pub fn upper_edge(&self) -> Option<f64> {
        self.intervals.last().map(|iv| iv.hi.w)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("band serialization")
    }
}

/// Sign of the margin as w goes to infinity, for modes where it can be
/// decided exactly from polynomial leading coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailSign {
    HoldsForever,
    FailsEventually,
    Unknown,
}

enum Sample {
    /// Signed margin plus the local magnitude scale of its computation;
    /// the hold tolerance is relative to that scale, so decayed
    /// high-frequency responses are not swallowed by an absolute slack.
    Margin(f64, f64),
    Pole,
}

/// Core scanner shared by the classical and generalized band operations.
/// The closure returns (margin, scale) at each frequency.
pub(crate) fn scan_band_with<F>(
    margin_at: F,
    grid: &GridSpec,
    refine: bool,
    tail: TailSign,
    cfg: &ToleranceConfig,
) -> Result<FrequencyBand>
where
    F: Fn(f64) -> Result<(f64, f64)> + Sync,
{
    grid.validate()?;
    let mut ws = vec![0.0];
    ws.extend(grid.points());
    if ws.is_empty() {
        return Err(Error::EmptyGrid);
    }

    let samples: Vec<Sample> = ws
        .par_iter()
        .map(|&w| match margin_at(w) {
            Ok((m, scale)) => Ok(Sample::Margin(m, scale)),
            Err(e) if e.is_pole() => Ok(Sample::Pole),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;

    let zero_excluded_pole = matches!(samples[0], Sample::Pole);
    let mut skipped: Vec<f64> = Vec::new();
    let valid_count = samples
        .iter()
        .filter(|s| matches!(s, Sample::Margin(..)))
        .count();
    if valid_count == 0 {
        return Err(Error::AllPoles);
    }

    let hold = |m: f64, scale: f64| m >= -cfg.pd_tol * scale;
    let margin_only = |w: f64| margin_at(w).map(|(m, _)| m);
    // Refined edges this far below the grid floor are indistinguishable
    // from zero: the margin there sits inside f64 rounding noise.
    let snap_floor = grid.w_min * 1e-3;

    let mut intervals: Vec<BandInterval> = Vec::new();
    let mut open: Option<BandEdge> = None;
    // last valid (w, margin, scale) seen, for closing intervals at breaks
    let mut prev_valid: Option<(f64, f64, f64)> = None;

    for (i, s) in samples.iter().enumerate() {
        let w = ws[i];
        match s {
            Sample::Pole => {
                if w > 0.0 {
                    skipped.push(w);
                }
                if let Some(lo) = open.take() {
                    let (pw, pm, _) = prev_valid.expect("open interval implies a valid sample");
                    intervals.push(BandInterval {
                        lo,
                        hi: BandEdge {
                            w: pw,
                            kind: EdgeKind::GridLimited,
                            margin: pm,
                        },
                    });
                }
            }
            Sample::Margin(m, scale) => {
                let holds_here = hold(*m, *scale);
                match (&open, holds_here) {
                    (None, true) => {
                        let edge = match prev_valid {
                            Some((pw, pm, ps)) if !hold(pm, ps) && refine => {
                                let (ew, em) =
                                    bisect_margin(&margin_only, w, *m, pw, pm, grid, cfg);
                                BandEdge {
                                    w: if ew < snap_floor { 0.0 } else { ew },
                                    kind: EdgeKind::Refined,
                                    margin: em,
                                }
                            }
                            _ => BandEdge {
                                w,
                                kind: EdgeKind::GridLimited,
                                margin: *m,
                            },
                        };
                        open = Some(edge);
                    }
                    (Some(_), false) => {
                        let lo = open.take().unwrap();
                        let (pw, pm, ps) = prev_valid.expect("open interval implies a valid sample");
                        let hi = if hold(pm, ps) && refine {
                            let (ew, em) = bisect_margin(&margin_only, pw, pm, w, *m, grid, cfg);
                            BandEdge {
                                w: if ew < snap_floor { 0.0 } else { ew },
                                kind: EdgeKind::Refined,
                                margin: em,
                            }
                        } else {
                            BandEdge {
                                w: pw,
                                kind: EdgeKind::GridLimited,
                                margin: pm,
                            }
                        };
                        intervals.push(BandInterval { lo, hi });
                    }
                    _ => {}
                }
                prev_valid = Some((w, *m, *scale));
            }
        }
    }

    if let Some(lo) = open.take() {
        let (pw, pm, _) = prev_valid.expect("open interval implies a valid sample");
        let hi = match tail {
            TailSign::HoldsForever => BandEdge {
                w: f64::INFINITY,
                kind: EdgeKind::Asymptotic,
                margin: pm,
            },
            _ => BandEdge {
                w: pw,
                kind: EdgeKind::GridLimited,
                margin: pm,
            },
        };
        intervals.push(BandInterval { lo, hi });
    }

    Ok(FrequencyBand {
        intervals,
        grid: *grid,
        refined: refine,
        skipped_pole_points: skipped,
        zero_excluded_pole,
    })
}

/// Bisection on the signed margin between a holding and a failing sample.
/// Returns the refined edge frequency and the margin there.
fn bisect_margin<F>(
    margin_at: &F,
    w_hold: f64,
    m_hold: f64,
    w_fail: f64,
    m_fail: f64,
    grid: &GridSpec,
    cfg: &ToleranceConfig,
) -> (f64, f64)
where
    F: Fn(f64) -> Result<f64>,
{
    // The hold-side margin can sit inside the tolerance window just below
    // zero; then there is no zero crossing to refine.
    if m_hold < 0.0 {
        return (w_hold, m_hold);
    }
    let mut lo = w_hold;
    let mut hi = w_fail;
    let mut m_lo = m_hold;
    let _ = m_fail;
    let abs_floor = grid.w_min * cfg.band_refine_rel;
    for _ in 0..200 {
        let span = (hi - lo).abs();
        if span <= cfg.band_refine_rel * lo.max(hi).abs() || span <= abs_floor {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match margin_at(mid) {
            Ok(m) if m >= 0.0 => {
                lo = mid;
                m_lo = m;
            }
            _ => {
                hi = mid;
            }
        }
    }
    (lo, m_lo)
}

/// Exact tail sign for the scalar PD margin Re(G) - sigma |G|^2:
/// the numerator polynomial q(w) = Re(N conj D)(w) - sigma |N(jw)|^2 has
/// the margin's sign, so its leading coefficient decides the limit.
fn siso_tail_sign(g: &crate::ratpoly::RationalFunction, sigma: f64) -> TailSign {
    let (re_nd, _) = freq_product_re_im(g.num(), g.den());
    let (norm_n, _) = freq_product_re_im(g.num(), g.num());
    let q = re_nd.sub(&norm_n.scale(sigma));
    if q.is_zero() {
        return TailSign::HoldsForever;
    }
    if q.leading() > 0.0 {
        TailSign::HoldsForever
    } else {
        TailSign::FailsEventually
    }
}

/// Tail sign of the scalar IF margin Re(G) - sigma via
/// q(w) = Re(N conj D)(w) - sigma |D(jw)|^2.
fn siso_if_tail_sign(g: &crate::ratpoly::RationalFunction, sigma: f64) -> TailSign {
    let (re_nd, _) = freq_product_re_im(g.num(), g.den());
    let (norm_d, _) = freq_product_re_im(g.den(), g.den());
    let q = re_nd.sub(&norm_d.scale(sigma));
    if q.is_zero() {
        return TailSign::HoldsForever;
    }
    if q.leading() > 0.0 {
        TailSign::HoldsForever
    } else {
        TailSign::FailsEventually
    }
}

/// Number of support angles used per frequency by the estimated MIMO scan.
const BAND_RANGE_ANGLES: usize = 180;

/// PD frequency band of the selected check over a log grid.
pub fn pd_band(
    g: &RationalMatrix,
    sigma: &PassivityIndex,
    grid: &GridSpec,
    mode: BandMode,
    cfg: &ToleranceConfig,
) -> Result<FrequencyBand> {
    match mode {
        BandMode::SisoExact => {
            let f = g.as_siso().ok_or_else(|| Error::Shape {
                msg: "siso_exact band requires a 1x1 system".into(),
            })?;
            let s = sigma.as_scalar().ok_or_else(|| Error::Shape {
                msg: "siso_exact band requires a scalar index".into(),
            })?;
            let tail = siso_tail_sign(f, s);
            // Raw margin rather than the guarded check: where 1 - sigma*G
            // vanishes exactly, G sits on the disk boundary and the
            // margin is a true zero, which the closed band includes.
            scan_band_with(
                |w| {
                    let gv = f.eval_jw(w, cfg)?;
                    let scale = gv.norm() + s.abs() * gv.norm_sqr();
                    Ok((gv.re - s * gv.norm_sqr(), scale))
                },
                grid,
                true,
                tail,
                cfg,
            )
        }
        BandMode::MimoExact => scan_band_with(
            |w| {
                let c = pdcore::pd_check_mimo_exact(g, sigma, w, cfg)?;
                Ok((c.lambda_min_value, c.norm))
            },
            grid,
            true,
            TailSign::Unknown,
            cfg,
        ),
        BandMode::MimoEstimated => {
            let s_eff = sigma.lambda_min();
            scan_band_with(
                |w| estimated_margin(g, sigma, s_eff, w, cfg),
                grid,
                false,
                TailSign::Unknown,
                cfg,
            )
        }
        BandMode::If => {
            let tail = match (g.as_siso(), sigma.as_scalar()) {
                (Some(f), Some(s)) => siso_if_tail_sign(f, s),
                _ => {
                    let all_sp = (0..g.dim())
                        .all(|i| (0..g.dim()).all(|j| g.entry(i, j).is_strictly_proper()));
                    if !all_sp {
                        TailSign::Unknown
                    } else {
                        let lmax = HermitianMatrix::from_real_sym(sigma.as_slice(), sigma.dim())
                            .lambda_max();
                        if lmax > 0.0 {
                            TailSign::FailsEventually
                        } else if lmax < 0.0 {
                            TailSign::HoldsForever
                        } else {
                            TailSign::Unknown
                        }
                    }
                }
            };
            scan_band_with(
                |w| {
                    let m = g.eval_jw(w, cfg)?;
                    let two_sigma = sigma
                        .to_cmatrix()
                        .scale(num_complex::Complex64::new(2.0, 0.0));
                    let h = HermitianMatrix::hermitian_part(&m.add(&m.adjoint()).sub(&two_sigma));
                    Ok((h.lambda_min(), h.max_row_sum_norm()))
                },
                grid,
                true,
                tail,
                cfg,
            )
        }
    }
}

/// Signed margin for the estimated (necessary) MIMO check; only the sign
/// is meaningful, so no bisection runs on it.
fn estimated_margin(
    g: &RationalMatrix,
    sigma: &PassivityIndex,
    s_eff: f64,
    w: f64,
    cfg: &ToleranceConfig,
) -> Result<(f64, f64)> {
    let m = g.eval_jw(w, cfg)?;
    if s_eff == 0.0 {
        let h = HermitianMatrix::hermitian_part(&m.add(&m.adjoint()));
        return Ok((h.lambda_min(), h.max_row_sum_norm()));
    }
    let check = pdcore::pd_check_mimo_necessary_value(&m, sigma, BAND_RANGE_ANGLES, cfg)?;
    let c = num_complex::Complex64::new(1.0 / (2.0 * s_eff), 0.0);
    let r = c.re.abs();
    let scale = r + m.max_row_sum_norm();
    let geom = if s_eff > 0.0 {
        r - crate::hermlin::numerical_radius(&m.sub_scaled_identity(c))
    } else {
        (check.worst_point - c).norm() - r
    };
    let margin = if check.holds {
        geom.max(0.0)
    } else {
        geom.min(-f64::MIN_POSITIVE)
    };
    Ok((margin, scale))
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionCheck {
    pub contained: bool,
    /// A frequency inside band(sigma2) but outside band(sigma1), if any.
    pub witness: Option<f64>,
}

/// Verify the contraction law: the band at the larger index must sit
/// inside the band at the smaller one.
pub fn contraction_check(
    g: &RationalMatrix,
    sigma1: &PassivityIndex,
    sigma2: &PassivityIndex,
    grid: &GridSpec,
    cfg: &ToleranceConfig,
) -> Result<ContractionCheck> {
    let strict = match (sigma1.as_scalar(), sigma2.as_scalar()) {
        (Some(a), Some(b)) => b > a,
        _ => sigma2.dominates(sigma1)?,
    };
    if !strict {
        return Err(Error::OrderingViolated);
    }
    let mode = if g.is_siso() {
        BandMode::SisoExact
    } else {
        BandMode::MimoEstimated
    };
    let band1 = pd_band(g, sigma1, grid, mode, cfg)?;
    let band2 = pd_band(g, sigma2, grid, mode, cfg)?;

    let tol = |w: f64| 1e-9 * (1.0 + w.abs());
    for iv2 in &band2.intervals {
        let mut ok = false;
        for iv1 in &band1.intervals {
            let lo_ok = iv1.lo.w <= iv2.lo.w + tol(iv2.lo.w);
            let hi_ok = if iv2.hi.w.is_infinite() {
                iv1.hi.w.is_infinite()
            } else {
                iv2.hi.w <= iv1.hi.w + tol(iv2.hi.w)
            };
            if lo_ok && hi_ok {
                ok = true;
                break;
            }
        }
        if !ok {
            let witness = witness_in_gap(iv2, &band1);
            return Ok(ContractionCheck {
                contained: false,
                witness,
            });
        }
    }
    Ok(ContractionCheck {
        contained: true,
        witness: None,
    })
}

fn witness_in_gap(iv2: &BandInterval, band1: &FrequencyBand) -> Option<f64> {
    let candidates = [
        iv2.lo.w,
        if iv2.hi.w.is_finite() {
            iv2.hi.w
        } else {
            iv2.lo.w.max(1.0) * 10.0
        },
        0.5 * (iv2.lo.w
            + if iv2.hi.w.is_finite() {
                iv2.hi.w
            } else {
                iv2.lo.w.max(1.0) * 100.0
            }),
    ];
    candidates.into_iter().find(|&w| !band1.contains(w))
}

/// Smallest decade-aligned grid frequency 10^(k * decade_step) at which
/// the scalar PD check fails; the case-study table convention.
pub fn first_failing_grid_point(
    g: &RationalMatrix,
    sigma: f64,
    decade_step: f64,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    if decade_step <= 0.0 {
        return Err(Error::Invalid {
            msg: "decade_step must be positive".into(),
        });
    }
    let f = g.as_siso().ok_or_else(|| Error::Shape {
        msg: "grid-point scan requires a 1x1 system".into(),
    })?;
    let default = GridSpec::default_band();
    let k_min = (default.w_min.log10() / decade_step).round() as i64;
    let k_max = (default.w_max.log10() / decade_step).round() as i64;
    for k in k_min..=k_max {
        let w = 10f64.powf(k as f64 * decade_step);
        match pdcore::pd_check_siso(f, sigma, w, cfg) {
            Ok(check) if !check.holds => return Ok(w),
            Ok(_) => {}
            Err(e) if e.is_pole() => {}
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoFailure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;
    use approx::assert_relative_eq;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn g3m() -> RationalMatrix {
        RationalMatrix::from_scalar(systems::g3())
    }

    /// Closed-form SISO edge for the G3 family: sqrt((d - sigma)/(T M)).
    fn g3_edge(sigma: f64) -> f64 {
        ((systems::D - sigma) / (systems::T * systems::M)).sqrt()
    }

    #[test]
    fn g3_band_third() {
        let grid = GridSpec::log(1e-3, 1e2, 100).unwrap();
        let band = pd_band(
            &g3m(),
            &PassivityIndex::scalar(1.0 / 3.0),
            &grid,
            BandMode::SisoExact,
            &cfg(),
        )
        .unwrap();
        assert_eq!(band.intervals.len(), 1);
        let iv = band.intervals[0];
        assert_eq!(iv.lo.w, 0.0);
        assert_relative_eq!(iv.hi.w, 5.27046, max_relative = 1e-5);
        assert_relative_eq!(iv.hi.w, g3_edge(1.0 / 3.0), max_relative = 1e-6);
        assert_eq!(iv.hi.kind, EdgeKind::Refined);
    }

    #[test]
    fn g3_band_half_is_single_point() {
        let grid = GridSpec::default_band();
        let band = pd_band(
            &g3m(),
            &PassivityIndex::scalar(0.5),
            &grid,
            BandMode::SisoExact,
            &cfg(),
        )
        .unwrap();
        assert_eq!(band.intervals.len(), 1);
        let iv = band.intervals[0];
        assert_eq!(iv.lo.w, 0.0);
        assert_eq!(iv.hi.w, 0.0);
    }

    #[test]
    fn g2_band_empty_with_zero_pole_flag() {
        let grid = GridSpec::default_band();
        let band = pd_band(
            &RationalMatrix::from_scalar(systems::g2()),
            &PassivityIndex::scalar(0.0),
            &grid,
            BandMode::SisoExact,
            &cfg(),
        )
        .unwrap();
        assert!(band.is_empty());
        assert!(band.zero_excluded_pole);
    }

    #[test]
    fn g1_band_extends_to_infinity() {
        let grid = GridSpec::default_band();
        let band = pd_band(
            &RationalMatrix::from_scalar(systems::g1()),
            &PassivityIndex::scalar(1.0 / 3.0),
            &grid,
            BandMode::SisoExact,
            &cfg(),
        )
        .unwrap();
        assert_eq!(band.intervals.len(), 1);
        assert!(band.intervals[0].hi.w.is_infinite());
        assert_eq!(band.intervals[0].hi.kind, EdgeKind::Asymptotic);
        assert!(band.contains(1e9));
    }

    #[test]
    fn refined_edges_match_closed_form() {
        let grid = GridSpec::default_band();
        for &sigma in &[-0.5, -0.2, 0.0, 0.2, 1.0 / 3.0] {
            let band = pd_band(
                &g3m(),
                &PassivityIndex::scalar(sigma),
                &grid,
                BandMode::SisoExact,
                &cfg(),
            )
            .unwrap();
            let edge = band.upper_edge().unwrap();
            assert_relative_eq!(edge, g3_edge(sigma), max_relative = 1e-6);
        }
    }

    #[test]
    fn first_failing_grid_points_match_table() {
        let cases = [
            (-0.5, 13.1826),
            (-0.2, 10.9648),
            (0.0, 9.3325),
            (0.2, 7.0795),
            (1.0 / 3.0, 5.3703),
        ];
        for (sigma, expect) in cases {
            let w = first_failing_grid_point(&g3m(), sigma, 0.01, &cfg()).unwrap();
            assert!(
                (w - expect).abs() < 5e-5,
                "sigma {sigma}: got {w}, want {expect}"
            );
        }
    }

    #[test]
    fn contraction_examples() {
        let grid = GridSpec::default_band();
        let r = contraction_check(
            &g3m(),
            &PassivityIndex::scalar(0.2),
            &PassivityIndex::scalar(0.5),
            &grid,
            &cfg(),
        )
        .unwrap();
        assert!(r.contained);

        let r2 = contraction_check(
            &g3m(),
            &PassivityIndex::scalar(-0.5),
            &PassivityIndex::scalar(0.0),
            &grid,
            &cfg(),
        )
        .unwrap();
        assert!(r2.contained);

        assert!(matches!(
            contraction_check(
                &g3m(),
                &PassivityIndex::scalar(0.2),
                &PassivityIndex::scalar(0.2),
                &grid,
                &cfg(),
            ),
            Err(Error::OrderingViolated)
        ));
    }

    #[test]
    fn grid_doubling_keeps_refined_edges() {
        let grid = GridSpec::log(1e-3, 1e2, 50).unwrap();
        let band_a = pd_band(
            &g3m(),
            &PassivityIndex::scalar(0.2),
            &grid,
            BandMode::SisoExact,
            &cfg(),
        )
        .unwrap();
        let band_b = pd_band(
            &g3m(),
            &PassivityIndex::scalar(0.2),
            &grid.doubled(),
            BandMode::SisoExact,
            &cfg(),
        )
        .unwrap();
        let ea = band_a.upper_edge().unwrap();
        let eb = band_b.upper_edge().unwrap();
        assert!((ea - eb).abs() <= 1e-6 * ea);
    }

    #[test]
    fn mimo_estimated_band_for_g4() {
        // Fig-4 style sampling: log w in [-3, 2], step 0.1
        let grid = GridSpec::log(1e-3, 1e2, 10).unwrap();
        let band = pd_band(
            &systems::g4(),
            &PassivityIndex::identity_scaled(2, 1.0 / 3.0),
            &grid,
            BandMode::MimoEstimated,
            &cfg(),
        )
        .unwrap();
        assert!(!band.refined);
        assert!(band.contains(10f64.powf(0.3)));
        assert!(!band.contains(10f64.powf(0.7)));
    }

    #[test]
    fn band_json_serializes_infinity_as_null() {
        let grid = GridSpec::default_band();
        let band = pd_band(
            &RationalMatrix::from_scalar(systems::g1()),
            &PassivityIndex::scalar(0.1),
            &grid,
            BandMode::SisoExact,
            &cfg(),
        )
        .unwrap();
        let json = band.to_json();
        assert!(json.contains("\"w\": null"));
    }
}
