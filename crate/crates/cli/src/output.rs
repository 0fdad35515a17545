//! Deterministic number formatting and CSV/SVG emission.
//!
//! Identical invocations must produce byte-identical files, so every
//! float goes through one formatter with a fixed precision and the SVG
//! emitter uses a fixed viewport mapping.

use std::fmt::Write as _;

use num_complex::Complex64;

/// Format with `sig` significant digits: plain decimal in a readable
/// range, scientific outside it.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..6).contains(&exp) {
        format!("{:.*e}", sig.saturating_sub(1), x)
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    }
}

/// One named series of (w, value) points.
pub struct Curve {
    pub name: String,
    /// (w, re, im, extra)
    pub rows: Vec<(f64, f64, f64, Option<f64>)>,
}

/// CSV with the standard header `name,w,re,im,extra`.
pub fn curves_to_csv(curves: &[Curve], sig: usize) -> String {
    let mut out = String::from("name,w,re,im,extra\n");
    for c in curves {
        for &(w, re, im, extra) in &c.rows {
            let extra_s = extra.map(|e| fmt_sig(e, sig)).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                c.name,
                fmt_sig(w, sig),
                fmt_sig(re, sig),
                fmt_sig(im, sig),
                extra_s
            );
        }
    }
    out
}

/// Circle geometry to draw next to a curve.
pub struct CircleOverlay {
    pub name: String,
    pub center: Complex64,
    pub radius: f64,
    /// Region is the complement of the disk.
    pub complement: bool,
}

const SVG_W: f64 = 800.0;
const SVG_H: f64 = 600.0;
const SVG_MARGIN: f64 = 40.0;
const PALETTE: [&str; 6] = ["#d95f02", "#7570b3", "#1b9e77", "#e7298a", "#66a61e", "#e6ab02"];

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

/// Minimal deterministic SVG 1.1: axes, polyline per curve, circle per
/// region, fixed 6-decimal coordinates.
pub fn curves_to_svg(curves: &[Curve], overlays: &[CircleOverlay]) -> String {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for c in curves {
        for &(_, re, im, _) in &c.rows {
            xs.push(re);
            ys.push(im);
        }
    }
    for o in overlays {
        xs.push(o.center.re - o.radius);
        xs.push(o.center.re + o.radius);
        ys.push(o.center.im - o.radius);
        ys.push(o.center.im + o.radius);
    }
    if xs.is_empty() {
        xs.push(0.0);
        ys.push(0.0);
    }
    let (x_min, x_max) = bounds(&xs);
    let (y_min, y_max) = bounds(&ys);
    let span_x = (x_max - x_min).max(1e-9);
    let span_y = (y_max - y_min).max(1e-9);
    let scale = ((SVG_W - 2.0 * SVG_MARGIN) / span_x).min((SVG_H - 2.0 * SVG_MARGIN) / span_y);
    let map_x = |x: f64| SVG_MARGIN + (x - x_min) * scale;
    let map_y = |y: f64| SVG_H - SVG_MARGIN - (y - y_min) * scale;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">"
    );
    let _ = writeln!(
        s,
        "<rect width=\"{SVG_W}\" height=\"{SVG_H}\" fill=\"white\"/>"
    );
    // axes through zero when visible
    if x_min <= 0.0 && x_max >= 0.0 {
        let _ = writeln!(
            s,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#bbbbbb\"/>",
            f6(map_x(0.0)),
            f6(map_y(y_min)),
            f6(map_x(0.0)),
            f6(map_y(y_max))
        );
    }
    if y_min <= 0.0 && y_max >= 0.0 {
        let _ = writeln!(
            s,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#bbbbbb\"/>",
            f6(map_x(x_min)),
            f6(map_y(0.0)),
            f6(map_x(x_max)),
            f6(map_y(0.0))
        );
    }
    for (i, o) in overlays.iter().enumerate() {
        let color = PALETTE[(curves.len() + i) % PALETTE.len()];
        let dash = if o.complement {
            " stroke-dasharray=\"6,4\""
        } else {
            ""
        };
        let _ = writeln!(
            s,
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>",
            f6(map_x(o.center.re)),
            f6(map_y(o.center.im)),
            f6(o.radius * scale)
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{}</text>",
            f6(map_x(o.center.re)),
            f6(map_y(o.center.im)),
            o.name
        );
    }
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for &(_, re, im, _) in &c.rows {
            let _ = write!(points, "{},{} ", f6(map_x(re)), f6(map_y(im)));
        }
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            points.trim_end()
        );
        if let Some(&(_, re, im, _)) = c.rows.first() {
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{}</text>",
                f6(map_x(re) + 4.0),
                f6(map_y(im) - 4.0),
                c.name
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for &x in v {
        if x.is_finite() {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if lo > hi {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}
