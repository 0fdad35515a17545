//! Full output-feedback passivity verdicts: winding number around the
//! forbidden point, PD-region containment, imaginary-axis residues, and
//! an independent brute-force oracle on the closed-loop denominator.
//!
//! Winding numbers accumulate the continuous argument of G(jw) - z0 over
//! the upward imaginary-axis contour. Real-coefficient symmetry is used
//! to double the upper half-sweep when the test point is real; imaginary
//! axis poles get the standard right-half-plane detour semicircles.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::pdcore::{self, PassivityIndex, PassivizationMode};
use crate::ratpoly::RationalFunction;
use crate::tol::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Passive,
    NotPassive,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidueCheck {
    /// Imaginary part of the pole location.
    pub frequency: f64,
    #[serde(serialize_with = "crate::serdeutil::cpx")]
    pub residue: Complex64,
    pub ok: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleVerdict {
    pub stable: bool,
    pub min_real_part: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PassivityReport {
    pub verdict: Verdict,
    pub winding_number: Option<i32>,
    pub unstable_poles: usize,
    /// Scanned frequencies where the locus left the PD region.
    pub containment_violations: Vec<f64>,
    pub min_margin: f64,
    pub min_margin_frequency: f64,
    pub forbidden_point_hit: bool,
    pub axis_pole_residues: Vec<ResidueCheck>,
    pub oracle_verdict: Option<OracleVerdict>,
    pub warnings: Vec<String>,
}

impl PassivityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

/// Winding outcome with the diagnostics behind the rounded integer.
#[derive(Debug, Clone, Copy)]
pub struct WindingDetail {
    pub winding: i32,
    /// Distance of the accumulated total from the returned integer.
    pub residual: f64,
    /// Minimum distance of the curve from the test point.
    pub min_distance: f64,
}

enum Piece {
    /// s = jw, w from w0 to w1 (0 <= w0 < w1).
    Axis { w0: f64, w1: f64 },
    /// s = j*center_w + eps * e^{j theta}, theta from th0 to th1.
    Arc {
        center_w: f64,
        eps: f64,
        th0: f64,
        th1: f64,
    },
}

impl Piece {
    fn point(&self, t: f64) -> Complex64 {
        match *self {
            Piece::Axis { w0, w1 } => {
                let w = if w0 > 0.0 {
                    w0 * (w1 / w0).powf(t)
                } else {
                    w0 + (w1 - w0) * t
                };
                Complex64::new(0.0, w)
            }
            Piece::Arc {
                center_w,
                eps,
                th0,
                th1,
            } => {
                let th = th0 + (th1 - th0) * t;
                Complex64::new(0.0, center_w) + Complex64::from_polar(eps, th)
            }
        }
    }
}

fn wrap_angle(a: f64) -> f64 {
    let mut x = a % (2.0 * std::f64::consts::PI);
    if x > std::f64::consts::PI {
        x -= 2.0 * std::f64::consts::PI;
    } else if x < -std::f64::consts::PI {
        x += 2.0 * std::f64::consts::PI;
    }
    x
}

struct ArgAccumulator<'a, F> {
    f: F,
    z0: Complex64,
    min_dist: f64,
    cfg: &'a ToleranceConfig,
}

impl<'a, F: Fn(f64) -> Result<Complex64>> ArgAccumulator<'a, F> {
    fn value(&mut self, t: f64) -> Result<Complex64> {
        let v = (self.f)(t)? - self.z0;
        let d = v.norm();
        if d < self.min_dist {
            self.min_dist = d;
        }
        Ok(v)
    }

    /// Continuous argument change over [0, 1] with adaptive bisection.
    fn sweep(&mut self) -> Result<f64> {
        const INITIAL: usize = 64;
        let mut total = 0.0;
        let mut t_prev = 0.0;
        let mut v_prev = self.value(0.0)?;
        for k in 1..=INITIAL {
            let t = k as f64 / INITIAL as f64;
            let v = self.value(t)?;
            total += self.refine(t_prev, v_prev, t, v, 52)?;
            t_prev = t;
            v_prev = v;
        }
        Ok(total)
    }

    fn refine(
        &mut self,
        ta: f64,
        va: Complex64,
        tb: f64,
        vb: Complex64,
        depth: usize,
    ) -> Result<f64> {
        let d = wrap_angle(vb.arg() - va.arg());
        let chord_ok = (vb - va).norm() <= 0.5 * va.norm().min(vb.norm());
        if d.abs() <= 0.4 && chord_ok {
            return Ok(d);
        }
        if depth == 0 {
            let guard = self.cfg.curve_point_guard * (1.0 + self.z0.norm());
            if self.min_dist <= guard {
                return Err(Error::CurveThroughPoint {
                    min_dist: self.min_dist,
                });
            }
            return Err(Error::WindingResidual { residual: 0.5 });
        }
        let tm = 0.5 * (ta + tb);
        let vm = self.value(tm)?;
        Ok(self.refine(ta, va, tm, vm, depth - 1)? + self.refine(tm, vm, tb, vb, depth - 1)?)
    }
}

/// Pieces of the upper-half contour (w >= 0), detoured around the given
/// imaginary-axis poles (positive frequencies plus optionally the
/// origin).
fn upper_contour(
    axis_poles: &[Complex64],
    w_max: f64,
    cfg: &ToleranceConfig,
) -> Result<Vec<Piece>> {
    let mut pieces = Vec::new();
    let mut pole_ws: Vec<f64> = Vec::new();
    let mut origin = false;
    for p in axis_poles {
        let eps_scale = cfg.curve_point_guard * (1.0 + p.norm());
        if p.im.abs() <= eps_scale {
            origin = true;
        } else if p.im > 0.0 {
            pole_ws.push(p.im);
        }
    }
    pole_ws.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut cursor = 0.0;
    if origin {
        let eps = 1e-6;
        pieces.push(Piece::Arc {
            center_w: 0.0,
            eps,
            th0: 0.0,
            th1: std::f64::consts::FRAC_PI_2,
        });
        cursor = eps;
    }
    for &w0 in &pole_ws {
        let eps = 1e-6 * (1.0 + w0);
        if w0 - eps <= cursor {
            return Err(Error::RepeatedAxisPole { frequency: w0 });
        }
        pieces.push(Piece::Axis {
            w0: cursor,
            w1: w0 - eps,
        });
        pieces.push(Piece::Arc {
            center_w: w0,
            eps,
            th0: -std::f64::consts::FRAC_PI_2,
            th1: std::f64::consts::FRAC_PI_2,
        });
        cursor = w0 + eps;
    }
    if cursor < w_max {
        pieces.push(Piece::Axis {
            w0: cursor,
            w1: w_max,
        });
    }
    Ok(pieces)
}

fn check_axis_simplicity(axis_poles: &[Complex64]) -> Result<()> {
    for (i, a) in axis_poles.iter().enumerate() {
        for b in axis_poles.iter().skip(i + 1) {
            if (a - b).norm() < 1e-6 * (1.0 + a.norm()) {
                return Err(Error::RepeatedAxisPole { frequency: a.im });
            }
        }
    }
    Ok(())
}

fn default_w_max(g: &RationalFunction, grid: &GridSpec, cfg: &ToleranceConfig) -> Result<f64> {
    let poles = g.den().roots(cfg)?;
    let max_pole = poles.iter().map(|p| p.norm()).fold(0.0, f64::max);
    Ok(grid.w_max.max(1e3 * (1.0 + max_pole)))
}

fn winding_over_pieces(
    g: &RationalFunction,
    point: Complex64,
    pieces: &[Piece],
    double_from_symmetry: bool,
    cfg: &ToleranceConfig,
) -> Result<WindingDetail> {
    let mut half = 0.0;
    let mut min_dist = f64::MAX;
    let mut v_first = None;
    let mut v_last = Complex64::new(0.0, 0.0);
    for piece in pieces {
        let mut acc = ArgAccumulator {
            f: |t: f64| g.eval(piece.point(t), cfg),
            z0: point,
            min_dist: f64::MAX,
            cfg,
        };
        let delta = acc.sweep()?;
        min_dist = min_dist.min(acc.min_dist);
        half += delta;
        if v_first.is_none() {
            v_first = Some(g.eval(piece.point(0.0), cfg)? - point);
        }
        v_last = g.eval(piece.point(1.0), cfg)? - point;
    }
    let guard = cfg.curve_point_guard * (1.0 + point.norm());
    if min_dist <= guard {
        return Err(Error::CurveThroughPoint { min_dist });
    }

    // Closure through s = +-j inf where strictly proper G vanishes: the
    // image passes through -z0.
    let w_inf = -point;
    if w_inf.norm() <= guard {
        return Err(Error::CurveThroughPoint {
            min_dist: w_inf.norm(),
        });
    }
    let total = if double_from_symmetry {
        let closure = wrap_angle(w_inf.arg() - v_last.arg())
            + wrap_angle(v_last.conj().arg() - w_inf.arg());
        2.0 * half + closure
    } else {
        // pieces already describe the full contour; close through -z0 on
        // both ends (start at -j w_max, end at +j w_max)
        let v_start = v_first.unwrap();
        wrap_angle(w_inf.arg() - v_last.arg()) + wrap_angle(v_start.arg() - w_inf.arg()) + half
    };

    let turns = total / (2.0 * std::f64::consts::PI);
    let winding = turns.round();
    let residual = (turns - winding).abs();
    if residual >= cfg.winding_residual {
        return Err(Error::WindingResidual { residual });
    }
    Ok(WindingDetail {
        winding: winding as i32,
        residual,
        min_distance: min_dist,
    })
}

/// Counter-clockwise encirclements of `point` by the Nyquist locus of a
/// strictly proper G with no imaginary-axis poles.
pub fn winding_number(
    g: &RationalFunction,
    point: Complex64,
    grid: &GridSpec,
    cfg: &ToleranceConfig,
) -> Result<i32> {
    Ok(winding_detail(g, point, grid, cfg)?.winding)
}

pub fn winding_detail(
    g: &RationalFunction,
    point: Complex64,
    grid: &GridSpec,
    cfg: &ToleranceConfig,
) -> Result<WindingDetail> {
    let cls = g.classify(cfg)?;
    if !cls.imaginary_axis_poles.is_empty() {
        return Err(Error::Invalid {
            msg: "system has imaginary-axis poles; use the detoured winding".into(),
        });
    }
    if !g.is_strictly_proper() {
        return Err(Error::NotStrictlyProper);
    }
    let w_max = default_w_max(g, grid, cfg)?;
    if point.im.abs() <= 1e-12 * (1.0 + point.norm()) {
        let pieces = upper_contour(&[], w_max, cfg)?;
        winding_over_pieces(g, point, &pieces, true, cfg)
    } else {
        full_sweep_detail(g, point, w_max, &[], cfg)
    }
}

/// Winding with right-half-plane detour semicircles around simple
/// imaginary-axis poles (the origin included).
pub fn detoured_winding(
    g: &RationalFunction,
    point: Complex64,
    grid: &GridSpec,
    cfg: &ToleranceConfig,
) -> Result<i32> {
    Ok(detoured_winding_detail(g, point, grid, cfg)?.winding)
}

pub fn detoured_winding_detail(
    g: &RationalFunction,
    point: Complex64,
    grid: &GridSpec,
    cfg: &ToleranceConfig,
) -> Result<WindingDetail> {
    let cls = g.classify(cfg)?;
    check_axis_simplicity(&cls.imaginary_axis_poles)?;
    if !g.is_strictly_proper() {
        return Err(Error::NotStrictlyProper);
    }
    let w_max = default_w_max(g, grid, cfg)?;
    if point.im.abs() <= 1e-12 * (1.0 + point.norm()) {
        let pieces = upper_contour(&cls.imaginary_axis_poles, w_max, cfg)?;
        winding_over_pieces(g, point, &pieces, true, cfg)
    } else {
        full_sweep_detail(g, point, w_max, &cls.imaginary_axis_poles, cfg)
    }
}

/// Full-range sweep without conjugate-symmetry doubling; the lower half
/// is the mirrored upper half because G has real coefficients.
pub fn winding_full_sweep(
    g: &RationalFunction,
    point: Complex64,
    grid: &GridSpec,
    cfg: &ToleranceConfig,
) -> Result<i32> {
    let cls = g.classify(cfg)?;
    check_axis_simplicity(&cls.imaginary_axis_poles)?;
    let w_max = default_w_max(g, grid, cfg)?;
    Ok(full_sweep_detail(g, point, w_max, &cls.imaginary_axis_poles, cfg)?.winding)
}

fn full_sweep_detail(
    g: &RationalFunction,
    point: Complex64,
    w_max: f64,
    axis_poles: &[Complex64],
    cfg: &ToleranceConfig,
) -> Result<WindingDetail> {
    let upper = upper_contour(axis_poles, w_max, cfg)?;
    let mut half_lower = 0.0;
    let mut half_upper = 0.0;
    let mut min_dist = f64::MAX;

    // Lower half: mirrored pieces traversed in reverse; G(conj s) =
    // conj(G(s)) for real coefficients.
    for piece in upper.iter().rev() {
        let mut acc = ArgAccumulator {
            f: |t: f64| Ok(g.eval(piece.point(1.0 - t), cfg)?.conj()),
            z0: point,
            min_dist: f64::MAX,
            cfg,
        };
        half_lower += acc.sweep()?;
        min_dist = min_dist.min(acc.min_dist);
    }
    for piece in upper.iter() {
        let mut acc = ArgAccumulator {
            f: |t: f64| g.eval(piece.point(t), cfg),
            z0: point,
            min_dist: f64::MAX,
            cfg,
        };
        half_upper += acc.sweep()?;
        min_dist = min_dist.min(acc.min_dist);
    }
    let guard = cfg.curve_point_guard * (1.0 + point.norm());
    if min_dist <= guard {
        return Err(Error::CurveThroughPoint { min_dist });
    }

    let last = upper.last().expect("contour has at least one piece");
    let v_end_upper = g.eval(last.point(1.0), cfg)? - point;
    let v_end_lower = g.eval(last.point(1.0), cfg)?.conj() - point;
    let w_inf = -point;
    if w_inf.norm() <= guard {
        return Err(Error::CurveThroughPoint {
            min_dist: w_inf.norm(),
        });
    }
    let closure = wrap_angle(w_inf.arg() - v_end_upper.arg())
        + wrap_angle(v_end_lower.arg() - w_inf.arg());
    let total = half_lower + half_upper + closure;
    let turns = total / (2.0 * std::f64::consts::PI);
    let winding = turns.round();
    let residual = (turns - winding).abs();
    if residual >= cfg.winding_residual {
        return Err(Error::WindingResidual { residual });
    }
    Ok(WindingDetail {
        winding: winding as i32,
        residual,
        min_distance: min_dist,
    })
}

/// Residues of H at its simple imaginary-axis poles: N(s0)/D'(s0);
/// acceptable when real and nonnegative up to tolerance.
pub fn axis_residues(h: &RationalFunction, cfg: &ToleranceConfig) -> Result<Vec<ResidueCheck>> {
    let cls = h.classify(cfg)?;
    check_axis_simplicity(&cls.imaginary_axis_poles)?;
    let dprime = h.den().derivative();
    let mut out = Vec::new();
    for p in &cls.imaginary_axis_poles {
        let d = dprime.eval(*p);
        if d.norm() < 1e-12 * (1.0 + h.den().eval_abs(p.norm())) {
            return Err(Error::RepeatedAxisPole { frequency: p.im });
        }
        let residue = h.num().eval(*p) / d;
        let ok = residue.re >= -cfg.residue_tol
            && residue.im.abs() <= cfg.residue_tol * (1.0 + residue.norm());
        out.push(ResidueCheck {
            frequency: p.im,
            residue,
            ok,
        });
    }
    out.sort_by(|a, b| a.frequency.partial_cmp(&b.frequency).unwrap());
    Ok(out)
}

/// Golden-section minimum of a margin function between two frequencies
/// (log interpolation when possible), returning (w, margin).
fn refine_min<F: Fn(f64) -> Result<f64>>(f: &F, w_lo: f64, w_hi: f64) -> Option<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let map = |t: f64| {
        if w_lo > 0.0 {
            w_lo * (w_hi / w_lo).powf(t)
        } else {
            w_lo + (w_hi - w_lo) * t
        }
    };
    let eval = |t: f64| f(map(t)).ok();
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    for _ in 0..60 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d)?;
        }
    }
    let t = if fc <= fd { c } else { d };
    Some((map(t), fc.min(fd)))
}

pub(crate) struct SweepOutcome {
    pub violations: Vec<f64>,
    pub min_margin: f64,
    pub min_margin_frequency: f64,
}

/// Scan a signed margin over w = 0 plus the grid, refine local minima,
/// and collect definite violations.
pub(crate) fn margin_sweep<F: Fn(f64) -> Result<f64> + Sync>(
    margin_at: F,
    grid: &GridSpec,
    violation_tol: f64,
    cfg: &ToleranceConfig,
) -> Result<SweepOutcome> {
    let mut ws = vec![0.0];
    ws.extend(grid.points());
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(ws.len());
    for &w in &ws {
        match margin_at(w) {
            Ok(m) => samples.push((w, m)),
            Err(e) if e.is_pole() => {}
            Err(e) => return Err(e),
        }
    }
    if samples.is_empty() {
        return Err(Error::AllPoles);
    }
    let mut min_margin = f64::MAX;
    let mut min_w = samples[0].0;
    let mut violations = Vec::new();
    for (i, &(w, m)) in samples.iter().enumerate() {
        if m < min_margin {
            min_margin = m;
            min_w = w;
        }
        if m < -violation_tol {
            violations.push(w);
        }
        let interior = i > 0 && i + 1 < samples.len();
        if interior && m <= samples[i - 1].1 && m <= samples[i + 1].1 {
            if let Some((rw, rm)) = refine_min(&margin_at, samples[i - 1].0, samples[i + 1].0) {
                if rm < min_margin {
                    min_margin = rm;
                    min_w = rw;
                }
                if rm < -violation_tol && m >= -violation_tol {
                    violations.push(rw);
                }
            }
        }
    }
    violations.sort_by(|a, b| a.partial_cmp(b).unwrap());
    violations.dedup();
    let _ = cfg;
    Ok(SweepOutcome {
        violations,
        min_margin,
        min_margin_frequency: min_w,
    })
}

/// Full OF passivity verdict for a scalar system: stability via winding
/// around (1/sigma, 0), PD-region containment of the locus, forbidden
/// point clearance, and axis residues of the transformed system. The
/// index sigma = 0 routes to the plain passivity conditions on G itself
/// (the forbidden point is undefined there).
pub fn of_passivity_check(
    g: &RationalFunction,
    sigma: f64,
    grid: &GridSpec,
    cfg: &ToleranceConfig,
) -> Result<PassivityReport> {
    if !g.is_strictly_proper() {
        return Err(Error::NotStrictlyProper);
    }
    let cls = g.classify(cfg)?;
    let mut warnings = cls.warnings.clone();
    let region = pdcore::pd_region(&PassivityIndex::scalar(sigma), PassivizationMode::Of);
    let scale = 1.0 + region.center.norm() + region.radius;
    let violation_tol = cfg.boundary_margin * scale;

    let sweep = margin_sweep(
        |w| Ok(region.margin(g.eval_jw(w, cfg)?)),
        grid,
        violation_tol,
        cfg,
    )?;

    // Forbidden point (1/sigma, 0) and winding (sigma != 0 only).
    let mut forbidden_point_hit = false;
    let mut winding = None;
    if sigma != 0.0 {
        let fp = Complex64::new(1.0 / sigma, 0.0);
        let fp_sweep = margin_sweep(
            |w| Ok((g.eval_jw(w, cfg)? - fp).norm()),
            grid,
            f64::MAX,
            cfg,
        )?;
        if fp_sweep.min_margin <= cfg.boundary_margin * (1.0 + fp.norm()) {
            forbidden_point_hit = true;
        } else {
            match detoured_winding_detail(g, fp, grid, cfg) {
                Ok(detail) => winding = Some(detail.winding),
                Err(Error::CurveThroughPoint { .. }) => forbidden_point_hit = true,
                Err(Error::WindingResidual { residual }) => {
                    warnings.push(format!("winding residual {residual:.3} too large"));
                }
                Err(e) => return Err(e),
            }
        }
    }

    // Residue condition on the transformed system.
    let h = if sigma != 0.0 {
        g.of_transform(sigma)?
    } else {
        g.clone()
    };
    let (residues, repeated_axis_pole) = match axis_residues(&h, cfg) {
        Ok(r) => (r, false),
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
    let boundary_touch = sweep.min_margin <= cfg.boundary_margin * scale;
    let residues_ok = residues.iter().all(|r| r.ok);

    let verdict = if !containment_ok
        || repeated_axis_pole
        || !residues_ok
        || (winding.is_some() && !stability_ok)
        || (sigma == 0.0 && cls.unstable_pole_count > 0)
    {
        Verdict::NotPassive
    } else if forbidden_point_hit || boundary_touch || (sigma != 0.0 && winding.is_none()) {
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

/// Brute-force oracle: root locations of D - sigma*N decide stability;
/// the minimum of Re H(jw) over a dense grid measures the PD condition.
pub fn oracle_of_passivity(
    g: &RationalFunction,
    sigma: f64,
    grid: &GridSpec,
    cfg: &ToleranceConfig,
) -> Result<OracleVerdict> {
    let h = g.of_transform(sigma)?;
    let roots = h.den().roots(cfg)?;
    let scale = 1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let tol_stab = cfg.stab_scale * scale;
    let mut stable = roots.iter().all(|r| r.re <= tol_stab);
    if stable {
        // axis roots must be simple with nonnegative residue
        let axis: Vec<Complex64> = roots
            .iter()
            .filter(|r| r.re.abs() <= tol_stab)
            .copied()
            .collect();
        if check_axis_simplicity(&axis).is_err() {
            stable = false;
        } else if !axis.is_empty() {
            match axis_residues(&h, cfg) {
                Ok(res) => {
                    if res.iter().any(|r| !r.ok) {
                        stable = false;
                    }
                }
                Err(_) => stable = false,
            }
        }
    }

    let mut min_real_part = f64::MAX;
    for w in std::iter::once(0.0).chain(grid.points()) {
        if let Ok(v) = h.eval_jw(w, cfg) {
            min_real_part = min_real_part.min(v.re);
        }
    }
    Ok(OracleVerdict {
        stable,
        min_real_part,
    })
}
