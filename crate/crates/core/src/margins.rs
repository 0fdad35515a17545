//! Robustness of passivization and the conservation law of the
//! frequency-wise damping metric.
//!
//! The robustness distance is the smallest gap between the nominal locus
//! and the PD-disk boundary over a finite scan range; any stable additive
//! perturbation with H-infinity norm below it preserves strict OF
//! passivity. The damping metric varsigma(w) = Re(1/G(jw)) obeys a
//! Poisson-kernel conservation identity for strictly proper minimal-phase
//! systems, which caps how much damping can be demanded over a bandwidth.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::ratpoly::RationalFunction;
use crate::tol::ToleranceConfig;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RobustnessResult {
    /// Smallest margin to the PD-disk boundary over the scanned range;
    /// negative means containment already fails.
    pub d_min: f64,
    pub argmin_frequency: f64,
    /// Strictly proper systems approach the origin, which sits on the
    /// disk boundary, so the unrestricted infimum is zero: the distance
    /// is meaningful only over the stated finite range.
    pub tangent_at_infinity: bool,
    pub range: (f64, f64),
}

/// Minimum distance of the nominal locus to the PD-disk boundary, over a
/// finite frequency range, with golden-section refinement around the grid
/// minimum.
pub fn robustness_distance(
    g0: &RationalFunction,
    sigma: f64,
    range: (f64, f64),
    grid: &GridSpec,
    cfg: &ToleranceConfig,
) -> Result<RobustnessResult> {
    if sigma <= 0.0 {
        return Err(Error::SigmaNotPositiveScalar { sigma });
    }
    if !(range.0 >= 0.0 && range.1 > range.0) {
        return Err(Error::Invalid {
            msg: format!("bad range [{}, {}]", range.0, range.1),
        });
    }
    let c = Complex64::new(1.0 / (2.0 * sigma), 0.0);
    let r = c.re;
    let margin = |w: f64| -> Result<f64> { Ok(r - (g0.eval_jw(w, cfg)? - c).norm()) };

    let mut ws: Vec<f64> = vec![range.0];
    ws.extend(grid.points().into_iter().filter(|&w| w > range.0 && w < range.1));
    ws.push(range.1);

    let mut best = f64::MAX;
    let mut best_i = 0;
    let mut margins = Vec::with_capacity(ws.len());
    for (i, &w) in ws.iter().enumerate() {
        let m = margin(w)?;
        margins.push(m);
        if m < best {
            best = m;
            best_i = i;
        }
    }

    // refine inside the bracket around the grid argmin
    let lo = if best_i == 0 { ws[0] } else { ws[best_i - 1] };
    let hi = if best_i + 1 == ws.len() {
        ws[best_i]
    } else {
        ws[best_i + 1]
    };
    let (mut w_star, mut m_star) = (ws[best_i], best);
    if hi > lo {
        if let Some((rw, rm)) = golden_min(&margin, lo, hi, cfg.refine_rel) {
            if rm < m_star {
                w_star = rw;
                m_star = rm;
            }
        }
    }

    Ok(RobustnessResult {
        d_min: m_star,
        argmin_frequency: w_star,
        tangent_at_infinity: g0.is_strictly_proper(),
        range,
    })
}

fn golden_min<F: Fn(f64) -> Result<f64>>(
    f: &F,
    w_lo: f64,
    w_hi: f64,
    rel: f64,
) -> Option<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let log_space = w_lo > 0.0;
    let map = |t: f64| {
        if log_space {
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
    let mut iters = 0;
    while (b - a) > rel && iters < 200 {
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
        iters += 1;
    }
    let t = if fc <= fd { c } else { d };
    Some((map(t), fc.min(fd)))
}

/// A perturbation of H-infinity norm `delta_norm` is admissible iff it is
/// strictly below the robustness distance.
pub fn check_perturbation(
    g0: &RationalFunction,
    sigma: f64,
    delta_norm: f64,
    range: (f64, f64),
    grid: &GridSpec,
    cfg: &ToleranceConfig,
) -> Result<bool> {
    let rob = robustness_distance(g0, sigma, range, grid, cfg)?;
    Ok(delta_norm < rob.d_min)
}

/// Frequency-wise damping metric: Re(1/G(jw)), evaluated as
/// Re(D(jw)/N(jw)) so poles of G are harmless; axis zeros of G are the
/// genuine singularities.
pub fn varsigma(g: &RationalFunction, w: f64, cfg: &ToleranceConfig) -> Result<f64> {
    let jw = Complex64::new(0.0, w);
    let n = g.num().eval(jw);
    if n.norm() <= cfg.pole_guard {
        return Err(Error::Invalid {
            msg: format!("G has a zero on the axis at w = {w}; 1/G undefined"),
        });
    }
    let v = g.den().eval(jw) / n;
    Ok(v.re)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadSpec {
    /// Stop when successive composite estimates differ by less than this.
    pub tol: f64,
    /// Panel-count doublings allowed (panels = 2^k).
    pub max_doublings: u32,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            tol: 1e-8,
            max_doublings: 14,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WaterbedResult {
    pub lhs: f64,
    pub rhs_quadrature: f64,
    pub abs_error: f64,
    pub a: f64,
    pub relative_degree: i64,
}

/// 16-point Gauss-Legendre nodes (positive half) and weights on [-1, 1].
#[allow(clippy::excessive_precision)]
const GL16_X: [f64; 8] = [
    0.095_012_509_837_637_440_185,
    0.281_603_550_779_258_913_230,
    0.458_016_777_657_227_386_342,
    0.617_876_244_402_643_748_447,
    0.755_404_408_355_003_033_895,
    0.865_631_202_387_831_743_880,
    0.944_575_023_073_232_576_078,
    0.989_400_934_991_649_932_596,
];
#[allow(clippy::excessive_precision)]
const GL16_W: [f64; 8] = [
    0.189_450_610_455_068_496_285,
    0.182_603_415_044_923_588_867,
    0.169_156_519_395_002_538_189,
    0.149_595_988_816_576_732_081,
    0.124_628_971_255_533_872_052,
    0.095_158_511_682_492_784_810,
    0.062_253_523_938_647_892_863,
    0.027_152_459_411_754_094_852,
];

fn gl16<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..8 {
        acc += GL16_W[i] * (f(mid + half * GL16_X[i]) + f(mid - half * GL16_X[i]));
    }
    acc * half
}

/// Conservation identity: 1/G(a) - L(a) equals the Poisson-weighted
/// integral of varsigma - Re(L(jw)).
///
/// The substitution w = a*tan(phi) absorbs the kernel exactly, so the
/// right-hand side is the plain integral of the substituted integrand
/// over (-pi/2, pi/2) divided by pi. Composite 16-point Gauss-Legendre
/// panels are doubled until two successive estimates agree.
pub fn waterbed_identity(
    g: &RationalFunction,
    a: f64,
    quad: &QuadSpec,
    cfg: &ToleranceConfig,
) -> Result<WaterbedResult> {
    if a <= 0.0 {
        return Err(Error::Invalid {
            msg: format!("evaluation point a = {a} must be positive"),
        });
    }
    let cls = g.classify(cfg)?;
    if !g.is_strictly_proper() {
        return Err(Error::NotStrictlyProper);
    }
    if !cls.minimal_phase {
        return Err(Error::NotMinimalPhase);
    }
    let dec = g.inverse_decomposition(cfg)?;
    // a must not be a pole of the remainder R = rem/N
    let n_at_a = g.num().eval(Complex64::new(a, 0.0));
    if n_at_a.norm() <= 1e-12 * (1.0 + g.num().eval_abs(a)) {
        return Err(Error::Invalid {
            msg: format!("a = {a} is a pole of the remainder term"),
        });
    }

    let ga = g.eval(Complex64::new(a, 0.0), cfg)?;
    let lhs = (Complex64::new(1.0, 0.0) / ga).re - dec.l.eval_real(a);

    // Far-tail guard: varsigma and Re(L) agree to leading order and their
    // difference cancels catastrophically; switch to C + Re(R(jw)) there.
    let switch = 1e6 * (1.0 + a);
    let integrand = |phi: f64| -> f64 {
        let w = a * phi.tan();
        if !w.is_finite() {
            return dec.c;
        }
        if w.abs() <= switch {
            match varsigma(g, w, cfg) {
                Ok(vs) => vs - poly_re_at_jw(&dec.l, w),
                Err(_) => dec.c,
            }
        } else {
            let jw = Complex64::new(0.0, w);
            let r_val = dec
                .r
                .eval(jw, cfg)
                .map(|v| v.re)
                .unwrap_or(0.0);
            dec.c + r_val
        }
    };

    let lo = -std::f64::consts::FRAC_PI_2;
    let hi = std::f64::consts::FRAC_PI_2;
    let mut prev = f64::NAN;
    let mut rhs = f64::NAN;
    let mut converged = false;
    for k in 2..=quad.max_doublings {
        let panels = 1usize << k;
        let mut acc = 0.0;
        let step = (hi - lo) / panels as f64;
        for p in 0..panels {
            let a0 = lo + step * p as f64;
            acc += gl16(integrand, a0, a0 + step);
        }
        rhs = acc / std::f64::consts::PI;
        if !prev.is_nan() && (rhs - prev).abs() < quad.tol * (1.0 + rhs.abs()) {
            converged = true;
            break;
        }
        prev = rhs;
    }
    if !converged {
        return Err(Error::QuadratureDiverged {
            msg: format!(
                "estimate still moving after 2^{} panels; wrong relative degree?",
                quad.max_doublings
            ),
        });
    }

    Ok(WaterbedResult {
        lhs,
        rhs_quadrature: rhs,
        abs_error: (lhs - rhs).abs(),
        a,
        relative_degree: cls.relative_degree,
    })
}

/// Re(L(jw)) for a real polynomial L.
fn poly_re_at_jw(l: &crate::ratpoly::Polynomial, w: f64) -> f64 {
    l.eval(Complex64::new(0.0, w)).re
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WaterbedBound {
    pub lhs: f64,
    /// (2 sigma / pi) * arctan(w_c / a); the symmetric integral of the
    /// Poisson kernel over [-w_c, w_c] is 2 arctan(w_c / a).
    pub bound_derived: f64,
    /// (sigma / pi) * arctan(w_c / a), as printed in the source analysis;
    /// reported alongside, not used for the verdict.
    pub bound_printed: f64,
    /// lhs >= bound_derived.
    pub satisfied: bool,
}

/// Bandwidth/index trade-off for relative degree one: if
/// varsigma >= sigma on [0, w_c] and varsigma >= 0 beyond, then
/// 1/G(a) - l1*a is bounded below by the Poisson mass of sigma on the
/// band. Both the derived factor-2 bound and the printed variant are
/// reported; the verdict uses the derived one.
pub fn waterbed_bound(
    g: &RationalFunction,
    sigma: f64,
    w_c: f64,
    a: f64,
    grid: &GridSpec,
    cfg: &ToleranceConfig,
) -> Result<WaterbedBound> {
    if a <= 0.0 || w_c <= 0.0 {
        return Err(Error::Invalid {
            msg: "need a > 0 and w_c > 0".into(),
        });
    }
    let dec = g.inverse_decomposition(cfg)?;
    if dec.l.degree() != 1 {
        return Err(Error::Invalid {
            msg: format!(
                "bound requires relative degree 1, got {}",
                g.relative_degree()
            ),
        });
    }
    // premise scan: varsigma >= sigma on [0, w_c], >= 0 beyond
    for w in std::iter::once(0.0)
        .chain(grid.points())
        .chain(std::iter::once(w_c))
    {
        if w > grid.w_max {
            continue;
        }
        let vs = varsigma(g, w, cfg)?;
        let (req, active) = if w <= w_c { (sigma, true) } else { (0.0, true) };
        if active && vs < req - 1e-12 * (1.0 + req.abs()) {
            return Err(Error::PremiseViolated {
                witness: w,
                value: vs,
                requirement: req,
            });
        }
    }

    let ga = g.eval(Complex64::new(a, 0.0), cfg)?;
    let l1 = dec.l.coeff(1);
    let lhs = (Complex64::new(1.0, 0.0) / ga).re - l1 * a;
    let atan = (w_c / a).atan();
    let bound_derived = 2.0 * sigma / std::f64::consts::PI * atan;
    let bound_printed = sigma / std::f64::consts::PI * atan;
    Ok(WaterbedBound {
        lhs,
        bound_derived,
        bound_printed,
        satisfied: lhs >= bound_derived - 1e-12 * (1.0 + bound_derived.abs()),
    })
}
