//! Polynomial root finding: companion-matrix eigenvalues via shifted
//! complex QR on the Hessenberg form, then Newton polish.

use num_complex::Complex64;

use super::Polynomial;
use crate::error::{Error, Result};
use crate::tol::ToleranceConfig;

pub(crate) fn poly_roots(p: &Polynomial, cfg: &ToleranceConfig) -> Result<Vec<Complex64>> {
    if p.is_zero() {
        return Err(Error::Invalid {
            msg: "zero polynomial has no well-defined root set".into(),
        });
    }
    if p.degree() == 0 {
        return Err(Error::DegreeZero);
    }

    // Exact zero roots at the origin come straight from the coefficients.
    let coeffs = p.coeffs();
    let k0 = coeffs.iter().position(|&c| c != 0.0).unwrap();
    let mut roots: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); k0];
    let reduced: Vec<f64> = coeffs[k0..].to_vec();
    let n = reduced.len() - 1;

    let mut inner: Vec<Complex64> = match n {
        0 => Vec::new(),
        1 => vec![Complex64::new(-reduced[0] / reduced[1], 0.0)],
        2 => quadratic_roots(reduced[2], reduced[1], reduced[0]),
        _ => {
            let lead = reduced[n];
            let monic: Vec<f64> = reduced.iter().map(|c| c / lead).collect();
            let mut eigs = companion_eigs(&monic)?;
            let rp = Polynomial::new(reduced.clone());
            for r in &mut eigs {
                *r = polish(&rp, *r);
            }
            eigs
        }
    };

    if n >= 3 {
        // Scaled residual check per root.
        let rp = Polynomial::new(reduced);
        for r in &inner {
            let scale = rp.eval_abs(r.norm()).max(f64::MIN_POSITIVE);
            if rp.eval(*r).norm() / scale > cfg.root_residual {
                return Err(Error::NotConverged);
            }
        }
    }

    roots.append(&mut inner);
    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(roots)
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<Complex64> {
    let disc = b * b - 4.0 * a * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        // Avoid cancellation: compute the larger-magnitude root first.
        let q = -0.5 * (b + b.signum() * sq);
        let (r1, r2) = if q == 0.0 {
            (0.0, 0.0)
        } else {
            (q / a, c / q)
        };
        vec![Complex64::new(r1, 0.0), Complex64::new(r2, 0.0)]
    } else {
        let re = -b / (2.0 * a);
        let im = (-disc).sqrt() / (2.0 * a);
        vec![Complex64::new(re, -im.abs()), Complex64::new(re, im.abs())]
    }
}

/// Up to three Newton steps, kept only while they reduce the residual.
fn polish(p: &Polynomial, mut r: Complex64) -> Complex64 {
    let dp = p.derivative();
    let mut best = r;
    let mut best_res = p.eval(r).norm();
    for _ in 0..3 {
        let d = dp.eval(r);
        if d.norm() < 1e-300 {
            break;
        }
        r -= p.eval(r) / d;
        let res = p.eval(r).norm();
        if res < best_res {
            best = r;
            best_res = res;
        } else {
            break;
        }
    }
    best
}

/// Eigenvalues of the companion matrix of a monic polynomial
/// (ascending coefficients, leading 1).
fn companion_eigs(monic: &[f64]) -> Result<Vec<Complex64>> {
    let n = monic.len() - 1;
    let zero = Complex64::new(0.0, 0.0);
    let mut h = vec![vec![zero; n]; n];
    for j in 0..n {
        h[0][j] = Complex64::new(-monic[n - 1 - j], 0.0);
    }
    for i in 1..n {
        h[i][i - 1] = Complex64::new(1.0, 0.0);
    }
    hessenberg_qr_eigs(h)
}

fn subdiag_negligible(h: &[Vec<Complex64>], m: usize) -> bool {
    let s = h[m - 1][m - 1].norm() + h[m][m].norm();
    h[m][m - 1].norm() <= f64::EPSILON * s + 1e-300
}

fn block2_eigs(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - det.scale(4.0)).sqrt();
    ((tr + disc) * 0.5, (tr - disc) * 0.5)
}

/// Shifted QR with explicit Givens rotations on an upper Hessenberg
/// complex matrix. Fine for the desk-scale degrees handled here.
fn hessenberg_qr_eigs(mut h: Vec<Vec<Complex64>>) -> Result<Vec<Complex64>> {
    let n = h.len();
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut stall = 0usize;
    let mut total_iter = 0usize;
    let max_total = 120 * n;

    loop {
        // Deflate everything already isolated at the bottom.
        loop {
            if hi == 0 {
                eigs.push(h[0][0]);
                eigs.sort_by(|a, b| {
                    a.re.partial_cmp(&b.re)
                        .unwrap()
                        .then(a.im.partial_cmp(&b.im).unwrap())
                });
                return Ok(eigs);
            }
            if subdiag_negligible(&h, hi) {
                eigs.push(h[hi][hi]);
                hi -= 1;
                stall = 0;
                continue;
            }
            if hi == 1 || subdiag_negligible(&h, hi - 1) {
                let (e1, e2) = block2_eigs(
                    h[hi - 1][hi - 1],
                    h[hi - 1][hi],
                    h[hi][hi - 1],
                    h[hi][hi],
                );
                eigs.push(e1);
                eigs.push(e2);
                if hi == 1 {
                    eigs.sort_by(|a, b| {
                        a.re.partial_cmp(&b.re)
                            .unwrap()
                            .then(a.im.partial_cmp(&b.im).unwrap())
                    });
                    return Ok(eigs);
                }
                hi -= 2;
                stall = 0;
                continue;
            }
            break;
        }

        total_iter += 1;
        stall += 1;
        if total_iter > max_total {
            return Err(Error::NotConverged);
        }

        // Active window [lo, hi].
        let mut lo = hi;
        while lo > 0 && !subdiag_negligible(&h, lo) {
            lo -= 1;
        }

        // Wilkinson shift; occasionally an exceptional shift to break cycles.
        let mu = if stall.is_multiple_of(25) {
            h[hi][hi] + h[hi][hi - 1].scale(0.75)
        } else {
            let (e1, e2) = block2_eigs(
                h[hi - 1][hi - 1],
                h[hi - 1][hi],
                h[hi][hi - 1],
                h[hi][hi],
            );
            if (e1 - h[hi][hi]).norm() < (e2 - h[hi][hi]).norm() {
                e1
            } else {
                e2
            }
        };

        for i in lo..=hi {
            h[i][i] -= mu;
        }

        // Forward pass: zero the subdiagonal with Givens rotations.
        let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let f = h[k][k];
            let g = h[k + 1][k];
            let (c, s) = givens(f, g);
            rots.push((c, s));
            for j in k..n {
                let a = h[k][j];
                let b = h[k + 1][j];
                h[k][j] = a.scale(c) + s * b;
                h[k + 1][j] = -s.conj() * a + b.scale(c);
            }
        }
        // Backward pass: multiply by Q on the right.
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let k = lo + idx;
            for row in h.iter_mut().take(hi + 1).skip(lo) {
                let a = row[k];
                let b = row[k + 1];
                row[k] = a.scale(c) + b * s.conj();
                row[k + 1] = -a * s + b.scale(c);
            }
        }
        for i in lo..=hi {
            h[i][i] += mu;
        }
    }
}

/// Rotation [[c, s], [-conj(s), c]] (c real) sending (f, g) to (r, 0).
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    let fn_ = f.norm();
    let gn = g.norm();
    if gn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if fn_ == 0.0 {
        return (0.0, g.conj() / gn);
    }
    let d = (fn_ * fn_ + gn * gn).sqrt();
    let c = fn_ / d;
    let s = (f / fn_) * g.conj() / d;
    (c, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn quintic_with_known_roots() {
        let roots = [
            Complex64::new(-1.0, 0.0),
            Complex64::new(-2.5, 0.0),
            Complex64::new(-0.3, 1.2),
            Complex64::new(-0.3, -1.2),
            Complex64::new(4.0, 0.0),
        ];
        let p = Polynomial::from_roots(&roots, 2.0);
        let found = p.roots(&cfg()).unwrap();
        assert_eq!(found.len(), 5);
        for r in &roots {
            let best = found.iter().map(|f| (f - r).norm()).fold(f64::MAX, f64::min);
            assert!(best < 1e-8, "root {r} missed by {best:e}");
        }
    }

    #[test]
    fn reconstruction_matches_coefficients() {
        // roots -> poly -> roots -> poly round trip at relative 1e-7
        let p = Polynomial::new(vec![0.5, 0.31, 0.006]);
        let roots = p.roots(&cfg()).unwrap();
        let q = Polynomial::from_roots(&roots, p.leading());
        for (a, b) in p.coeffs().iter().zip(q.coeffs()) {
            assert_relative_eq!(a, b, max_relative = 1e-7);
        }
    }

    #[test]
    fn repeated_root() {
        // (s+1)^4
        let p = Polynomial::new(vec![1.0, 4.0, 6.0, 4.0, 1.0]);
        let found = p.roots(&cfg()).unwrap();
        assert_eq!(found.len(), 4);
        for r in &found {
            assert!((r + Complex64::new(1.0, 0.0)).norm() < 1e-3);
        }
    }

    #[test]
    fn high_degree_random_coeffs() {
        let coeffs: Vec<f64> = (0..13)
            .map(|k| ((k * 2654435761u64 as usize) % 17) as f64 - 8.0 + 0.5)
            .collect();
        let p = Polynomial::new(coeffs);
        let roots = p.roots(&cfg()).unwrap();
        assert_eq!(roots.len(), p.degree());
        for r in &roots {
            let scale = p.eval_abs(r.norm());
            assert!(p.eval(*r).norm() / scale <= 1e-8);
        }
    }
}
