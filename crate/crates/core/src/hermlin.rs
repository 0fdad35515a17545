//! Small dense complex Hermitian numerics: cyclic Jacobi
//! eigendecomposition, positive-semidefiniteness tests, Hermitian matrix
//! pencils, numerical range and numerical radius.

use num_complex::Complex64;

use crate::cmatrix::CMatrix;
use crate::error::{Error, Result};
use crate::tol::ToleranceConfig;

/// Complex Hermitian matrix; entries are kept exactly symmetric
/// (a[j][i] == conj(a[i][j]), real diagonal) after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

impl HermitianMatrix {
    /// Validate approximate symmetry, then symmetrize exactly.
    pub fn new(m: &CMatrix, cfg: &ToleranceConfig) -> Result<Self> {
        let n = m.dim();
        for i in 0..n {
            for j in i..n {
                let dev = (m.get(i, j) - m.get(j, i).conj()).norm();
                if dev > 2.0 * cfg.herm_sym_tol {
                    return Err(Error::Invalid {
                        msg: format!("matrix not Hermitian: entry ({i},{j}) deviates by {dev:.3e}"),
                    });
                }
            }
        }
        Ok(Self::hermitian_part(m))
    }

    /// (M + M^H) / 2, exactly Hermitian by construction.
    pub fn hermitian_part(m: &CMatrix) -> Self {
        let n = m.dim();
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            out.set(i, i, Complex64::new(m.get(i, i).re, 0.0));
            for j in (i + 1)..n {
                let v = (m.get(i, j) + m.get(j, i).conj()) * 0.5;
                out.set(i, j, v);
                out.set(j, i, v.conj());
            }
        }
        HermitianMatrix { m: out }
    }

    pub fn from_real_sym(rows: &[f64], n: usize) -> Self {
        assert_eq!(rows.len(), n * n);
        let m = CMatrix::from_fn(n, |i, j| {
            Complex64::new(0.5 * (rows[i * n + j] + rows[j * n + i]), 0.0)
        });
        HermitianMatrix { m }
    }

    pub fn zero(n: usize) -> Self {
        HermitianMatrix {
            m: CMatrix::zeros(n),
        }
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix {
            m: CMatrix::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m.get(i, j)
    }

    pub fn as_cmatrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn max_row_sum_norm(&self) -> f64 {
        self.m.max_row_sum_norm()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i).re).sum()
    }

    /// Full eigendecomposition by cyclic complex Jacobi rotations.
    /// Eigenvalues ascending; eigenvectors are the matching columns.
    pub fn eig(&self) -> HermEig {
        herm_eig(self)
    }

    pub fn lambda_min(&self) -> f64 {
        self.eig().values[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eig().values.last().unwrap()
    }
}

#[derive(Debug, Clone)]
pub struct HermEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column k is the eigenvector of values[k]; orthonormal.
    pub vectors: CMatrix,
}

impl HermEig {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        (0..self.vectors.dim()).map(|i| self.vectors.get(i, k)).collect()
    }
}

/// Cyclic Jacobi for complex Hermitian matrices.
pub fn herm_eig(h: &HermitianMatrix) -> HermEig {
    let n = h.dim();
    assert!((1..=64).contains(&n), "hermitian eig supports 1 <= p <= 64");
    let mut a = h.m.clone();
    let mut v = CMatrix::identity(n);

    let fro = a.fro_norm();
    let stop = 1e-14 * (fro + 1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a.get(p, q).norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let r = apq.norm();
                let alpha = a.get(p, p).re;
                let beta = a.get(q, q).re;
                if r <= f64::EPSILON * (alpha.abs() + beta.abs() + 1e-300) {
                    a.set(p, q, Complex64::new(0.0, 0.0));
                    a.set(q, p, Complex64::new(0.0, 0.0));
                    continue;
                }
                let phase = apq / r; // e^{i phi}
                let theta = (beta - alpha) / (2.0 * r);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let se = phase.conj() * s; // s * e^{-i phi}

                for j in 0..n {
                    if j == p || j == q {
                        continue;
                    }
                    let ajp = a.get(j, p);
                    let ajq = a.get(j, q);
                    let njp = ajp.scale(c) - se * ajq;
                    let njq = ajp.scale(s) + phase.conj() * ajq.scale(c);
                    a.set(j, p, njp);
                    a.set(p, j, njp.conj());
                    a.set(j, q, njq);
                    a.set(q, j, njq.conj());
                }
                a.set(p, p, Complex64::new(alpha - t * r, 0.0));
                a.set(q, q, Complex64::new(beta + t * r, 0.0));
                a.set(p, q, Complex64::new(0.0, 0.0));
                a.set(q, p, Complex64::new(0.0, 0.0));

                for j in 0..n {
                    let vjp = v.get(j, p);
                    let vjq = v.get(j, q);
                    v.set(j, p, vjp.scale(c) - se * vjq);
                    v.set(j, q, vjp.scale(s) + phase.conj() * vjq.scale(c));
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.partial_cmp(&a.get(j, j).re).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a.get(i, i).re).collect();
    let vectors = CMatrix::from_fn(n, |i, k| v.get(i, order[k]));
    HermEig { values, vectors }
}

/// PSD up to a slack relative to the max-row-sum norm:
/// lambda_min(M) >= -tol * (1 + ||M||).
pub fn is_psd(m: &HermitianMatrix, tol: f64) -> bool {
    debug_assert!(tol >= 0.0);
    m.lambda_min() >= -tol * (1.0 + m.max_row_sum_norm())
}

/// Generalized eigenvalues of A x = lambda B x restricted to range(B),
/// plus a report on whether A is PSD on ker(B).
#[derive(Debug, Clone)]
pub struct PencilResult {
    /// Ascending generalized eigenvalues on range(B).
    pub eigenvalues: Vec<f64>,
    pub kernel_dim: usize,
    /// Whether A restricted to ker(B) is PSD.
    pub a_psd_on_kernel: bool,
}

pub fn pencil_eigs(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    cfg: &ToleranceConfig,
) -> Result<PencilResult> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::Shape {
            msg: format!("pencil dimensions differ: {} vs {}", n, b.dim()),
        });
    }
    let eig_b = b.eig();
    let norm_b = b.max_row_sum_norm();
    let neg_floor = 1e-12 * (1.0 + norm_b);
    if eig_b.values[0] < -neg_floor {
        return Err(Error::IndefinitePencil {
            lambda_min: eig_b.values[0],
        });
    }
    let thr = cfg.rank_rel * norm_b;
    let range_idx: Vec<usize> = (0..n).filter(|&i| eig_b.values[i] > thr).collect();
    let kernel_idx: Vec<usize> = (0..n).filter(|&i| eig_b.values[i] <= thr).collect();

    // Whitened reduced problem C = W^H A W, W = U_r diag(1/sqrt(beta)).
    let r = range_idx.len();
    let eigenvalues = if r == 0 {
        Vec::new()
    } else {
        let mut w = Vec::with_capacity(r);
        for &idx in &range_idx {
            let scale = 1.0 / eig_b.values[idx].sqrt();
            let col: Vec<Complex64> = eig_b.vector(idx).iter().map(|x| x.scale(scale)).collect();
            w.push(col);
        }
        let mut c = CMatrix::zeros(r);
        for (i, wi) in w.iter().enumerate() {
            let awj: Vec<Vec<Complex64>> = w.iter().map(|wj| a.as_cmatrix().matvec(wj)).collect();
            for (j, awjv) in awj.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += wi[k].conj() * awjv[k];
                }
                c.set(i, j, acc);
            }
        }
        let ch = HermitianMatrix::hermitian_part(&c);
        ch.eig().values
    };

    let kdim = kernel_idx.len();
    let a_psd_on_kernel = if kdim == 0 {
        true
    } else {
        let mut k = CMatrix::zeros(kdim);
        let cols: Vec<Vec<Complex64>> = kernel_idx.iter().map(|&i| eig_b.vector(i)).collect();
        for (i, ui) in cols.iter().enumerate() {
            for (j, uj) in cols.iter().enumerate() {
                let auj = a.as_cmatrix().matvec(uj);
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..n {
                    acc += ui[t].conj() * auj[t];
                }
                k.set(i, j, acc);
            }
        }
        is_psd(&HermitianMatrix::hermitian_part(&k), cfg.psd_rel)
    };

    Ok(PencilResult {
        eigenvalues,
        kernel_dim: kdim,
        a_psd_on_kernel,
    })
}

/// Numerical-range boundary samples, aligned by support angle.
#[derive(Debug, Clone)]
pub struct NumericalRangeBoundary {
    pub angles: Vec<f64>,
    pub boundary_points: Vec<Complex64>,
    pub support_values: Vec<f64>,
}

/// Largest eigenpair of the Hermitian part of e^{-i theta} M; returns
/// (support value, eigenvector, Rayleigh boundary point v^H M v).
pub fn support_point(m: &CMatrix, theta: f64) -> (f64, Vec<Complex64>, Complex64) {
    let rot = Complex64::from_polar(1.0, -theta);
    let h = HermitianMatrix::hermitian_part(&m.scale(rot));
    let eig = h.eig();
    let k = h.dim() - 1;
    let v = eig.vector(k);
    let mv = m.matvec(&v);
    let mut rho = Complex64::new(0.0, 0.0);
    let mut nrm = 0.0;
    for i in 0..v.len() {
        rho += v[i].conj() * mv[i];
        nrm += v[i].norm_sqr();
    }
    (eig.values[k], v, rho / nrm)
}

/// Boundary of the numerical range sampled at `n_angles` support
/// directions, with a convex-hull cleanup pass. Eigenvector jitter near
/// multiple eigenvalues can produce interior points; those are dropped.
pub fn numerical_range(m: &CMatrix, n_angles: usize) -> NumericalRangeBoundary {
    assert!(n_angles >= 8, "need at least 8 support angles");
    let mut angles = Vec::with_capacity(n_angles);
    let mut points = Vec::with_capacity(n_angles);
    let mut support = Vec::with_capacity(n_angles);
    for k in 0..n_angles {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / n_angles as f64;
        let (h, _, rho) = support_point(m, theta);
        angles.push(theta);
        points.push(rho);
        support.push(h);
    }

    let scale = points.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let hull = convex_hull(&points);
    let keep: Vec<usize> = if hull.len() < 3 {
        (0..points.len()).collect()
    } else {
        (0..points.len())
            .filter(|&i| dist_to_polygon(points[i], &hull) <= 1e-9 * scale)
            .collect()
    };
    NumericalRangeBoundary {
        angles: keep.iter().map(|&i| angles[i]).collect(),
        boundary_points: keep.iter().map(|&i| points[i]).collect(),
        support_values: keep.iter().map(|&i| support[i]).collect(),
    }
}

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Monotone-chain convex hull (counterclockwise, no interior points).
fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = points.to_vec();
    pts.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    pts.dedup_by(|a, b| (*a - *b).norm() == 0.0);
    let n = pts.len();
    if n < 3 {
        return pts;
    }
    let mut hull: Vec<Complex64> = Vec::with_capacity(2 * n);
    for &p in pts.iter() {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn dist_to_segment(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let denom = ab.norm_sqr();
    if denom == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a).re * ab.re) + ((p - a).im * ab.im)) / denom;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab.scale(t))).norm()
}

fn dist_to_polygon(p: Complex64, hull: &[Complex64]) -> f64 {
    let n = hull.len();
    (0..n)
        .map(|i| dist_to_segment(p, hull[i], hull[(i + 1) % n]))
        .fold(f64::MAX, f64::min)
}

/// Numerical radius: max over support directions of the support value,
/// refined by golden-section search around the best grid angle. The grid
/// stage alone is monotone under refinement; the returned value is never
/// below the grid maximum.
pub fn numerical_radius(m: &CMatrix) -> f64 {
    const N: usize = 720;
    let h = |theta: f64| {
        let rot = Complex64::from_polar(1.0, -theta);
        HermitianMatrix::hermitian_part(&m.scale(rot)).lambda_max()
    };
    let mut best = f64::MIN;
    let mut best_theta = 0.0;
    for k in 0..N {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / N as f64;
        let v = h(theta);
        if v > best {
            best = v;
            best_theta = theta;
        }
    }
    let step = 2.0 * std::f64::consts::PI / N as f64;
    let refined = golden_max(h, best_theta - step, best_theta + step, 80);
    refined.max(best).max(0.0)
}

/// Golden-section maximization on [a, b].
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}
