//! Positive-damping condition checks and PD-region geometry.
//!
//! SISO: Re(G(jw)) >= sigma |G(jw)|^2.
//! MIMO exact: G + G^H - 2 G sigma G^H PSD.
//! MIMO necessary: the numerical range of G(jw) stays in the PD region
//! derived from lambda_min(sigma).
//! The region itself is a disk for positive effective index, the closed
//! complement of a disk for negative, and the right half-plane at zero.

use num_complex::Complex64;
use serde::Serialize;

use crate::cmatrix::CMatrix;
use crate::error::{Error, Result};
use crate::hermlin::{self, HermitianMatrix};
use crate::ratpoly::{RationalFunction, RationalMatrix};
use crate::tol::ToleranceConfig;

/// Real symmetric passivity index; scalar when p = 1. The smallest
/// eigenvalue is cached because every region query needs it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassivityIndex {
    dim: usize,
    /// Row-major symmetric data.
    matrix: Vec<f64>,
    lambda_min: f64,
}

impl PassivityIndex {
    pub fn scalar(sigma: f64) -> Self {
        PassivityIndex {
            dim: 1,
            matrix: vec![sigma],
            lambda_min: sigma,
        }
    }

    pub fn identity_scaled(dim: usize, sigma: f64) -> Self {
        let mut matrix = vec![0.0; dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = sigma;
        }
        PassivityIndex {
            dim,
            matrix,
            lambda_min: sigma,
        }
    }

    /// Validate symmetry to 1e-12 absolute, then symmetrize.
    pub fn from_matrix(rows: Vec<Vec<f64>>, cfg: &ToleranceConfig) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape {
                msg: "passivity index must be square and nonempty".into(),
            });
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if (rows[i][j] - rows[j][i]).abs() > cfg.herm_sym_tol {
                    return Err(Error::Invalid {
                        msg: format!(
                            "passivity index not symmetric at ({i},{j}): {} vs {}",
                            rows[i][j], rows[j][i]
                        ),
                    });
                }
            }
        }
        let mut matrix = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                matrix[i * dim + j] = 0.5 * (rows[i][j] + rows[j][i]);
            }
        }
        let lambda_min = HermitianMatrix::from_real_sym(&matrix, dim).lambda_min();
        Ok(PassivityIndex {
            dim,
            matrix,
            lambda_min,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.matrix
    }

    /// lambda_min(sigma), the effective scalar index of the region tests.
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn is_scalar(&self) -> bool {
        self.dim == 1
    }

    pub fn as_scalar(&self) -> Option<f64> {
        if self.dim == 1 {
            Some(self.matrix[0])
        } else {
            None
        }
    }

    /// sigma2 - sigma1 positive definite (strictly).
    pub fn dominates(&self, other: &PassivityIndex) -> Result<bool> {
        if self.dim != other.dim {
            return Err(Error::Shape {
                msg: "index dimensions differ".into(),
            });
        }
        let diff: Vec<f64> = self
            .matrix
            .iter()
            .zip(&other.matrix)
            .map(|(a, b)| a - b)
            .collect();
        let lmin = HermitianMatrix::from_real_sym(&diff, self.dim).lambda_min();
        Ok(lmin > 0.0)
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, |i, j| Complex64::new(self.get(i, j), 0.0))
    }

    /// (2 sigma)^{-1} for sigma > 0, via eigendecomposition.
    fn half_inverse(&self) -> Result<Vec<f64>> {
        if self.lambda_min <= 1e-12 {
            return Err(Error::SigmaNotPositive {
                lambda_min: self.lambda_min,
            });
        }
        let h = HermitianMatrix::from_real_sym(&self.matrix, self.dim);
        let e = h.eig();
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for k in 0..n {
            let v = e.vector(k);
            let s = 1.0 / (2.0 * e.values[k]);
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] += (v[i] * v[j].conj()).re * s;
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PDRegionKind {
    OfDisk,
    OfDiskComplement,
    HalfPlaneReNonneg,
    IfHalfPlane,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PassivizationMode {
    Of,
    If,
}

/// Closed region of the complex plane where the frequency response (or
/// every Rayleigh quotient) must lie for the PD condition to hold.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PDRegion {
    pub kind: PDRegionKind,
    #[serde(serialize_with = "crate::serdeutil::cpx")]
    pub center: Complex64,
    pub radius: f64,
    /// Half-plane boundary Re(z) >= shift (IF case).
    pub shift: f64,
}

impl PDRegion {
    fn tol_scale(&self) -> f64 {
        match self.kind {
            PDRegionKind::OfDisk | PDRegionKind::OfDiskComplement => {
                1.0 + self.center.norm() + self.radius
            }
            PDRegionKind::HalfPlaneReNonneg | PDRegionKind::IfHalfPlane => 1.0 + self.shift.abs(),
        }
    }

    /// Signed containment margin: positive inside, zero on the boundary.
    pub fn margin(&self, z: Complex64) -> f64 {
        match self.kind {
            PDRegionKind::OfDisk => self.radius - (z - self.center).norm(),
            PDRegionKind::OfDiskComplement => (z - self.center).norm() - self.radius,
            PDRegionKind::HalfPlaneReNonneg => z.re,
            PDRegionKind::IfHalfPlane => z.re - self.shift,
        }
    }
}

/// PD region for a passivity index; sigma_eff = lambda_min(sigma).
pub fn pd_region(sigma: &PassivityIndex, mode: PassivizationMode) -> PDRegion {
    let s = sigma.lambda_min();
    match mode {
        PassivizationMode::If => PDRegion {
            kind: PDRegionKind::IfHalfPlane,
            center: Complex64::new(0.0, 0.0),
            radius: 0.0,
            shift: s,
        },
        PassivizationMode::Of => {
            if s == 0.0 {
                PDRegion {
                    kind: PDRegionKind::HalfPlaneReNonneg,
                    center: Complex64::new(0.0, 0.0),
                    radius: 0.0,
                    shift: 0.0,
                }
            } else {
                let c = 1.0 / (2.0 * s);
                PDRegion {
                    kind: if s > 0.0 {
                        PDRegionKind::OfDisk
                    } else {
                        PDRegionKind::OfDiskComplement
                    },
                    center: Complex64::new(c, 0.0),
                    radius: c.abs(),
                    shift: 0.0,
                }
            }
        }
    }
}

/// Closed-region membership with tolerance tol * (1 + |center| + radius).
pub fn region_contains(r: &PDRegion, z: Complex64, tol: f64) -> bool {
    r.margin(z) >= -tol * r.tol_scale()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SisoCheck {
    pub holds: bool,
    /// Signed: Re(G) - sigma |G|^2, positive means PD satisfied with slack.
    pub margin: f64,
}

/// SISO PD check at a frequency-response value.
pub fn pd_check_siso_value(g: Complex64, sigma: f64, cfg: &ToleranceConfig) -> Result<SisoCheck> {
    let one_minus = Complex64::new(1.0, 0.0) - g.scale(sigma);
    if one_minus.norm() <= cfg.singular_guard {
        return Err(Error::SingularTransform {
            msg: format!("1 - sigma*G = {one_minus} at the test frequency"),
        });
    }
    let margin = g.re - sigma * g.norm_sqr();
    let scale = 1.0 + g.norm() + sigma.abs() * g.norm_sqr();
    Ok(SisoCheck {
        holds: margin >= -cfg.pd_tol * scale,
        margin,
    })
}

pub fn pd_check_siso(
    g: &RationalFunction,
    sigma: f64,
    w: f64,
    cfg: &ToleranceConfig,
) -> Result<SisoCheck> {
    pd_check_siso_value(g.eval_jw(w, cfg)?, sigma, cfg)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MimoExactCheck {
    pub holds: bool,
    /// lambda_min of G + G^H - 2 G sigma G^H.
    pub lambda_min_value: f64,
    /// Max-row-sum norm of the tested matrix; the natural margin scale.
    pub norm: f64,
}

fn smallest_singular_value(m: &CMatrix) -> f64 {
    let mhm = m.adjoint().mul(m);
    let h = HermitianMatrix::hermitian_part(&mhm);
    h.lambda_min().max(0.0).sqrt()
}

/// Exact MIMO PD check at a matrix value.
pub fn pd_check_mimo_exact_value(
    m: &CMatrix,
    sigma: &PassivityIndex,
    cfg: &ToleranceConfig,
) -> Result<MimoExactCheck> {
    if sigma.dim() != m.dim() {
        return Err(Error::Shape {
            msg: "sigma dimension does not match system".into(),
        });
    }
    let i_minus = CMatrix::identity(m.dim()).sub(&m.mul_real(sigma.as_slice()));
    if smallest_singular_value(&i_minus) <= cfg.matrix_singular_guard {
        return Err(Error::SingularTransform {
            msg: "I - G(jw) sigma is singular at the test frequency".into(),
        });
    }
    let gsg = m.mul_real(sigma.as_slice()).mul(&m.adjoint());
    let sum = m.add(&m.adjoint()).sub(&gsg.scale(Complex64::new(2.0, 0.0)));
    let h = HermitianMatrix::hermitian_part(&sum);
    let lambda_min_value = h.lambda_min();
    let norm = h.max_row_sum_norm();
    Ok(MimoExactCheck {
        holds: lambda_min_value >= -cfg.psd_rel * (1.0 + norm),
        lambda_min_value,
        norm,
    })
}

pub fn pd_check_mimo_exact(
    g: &RationalMatrix,
    sigma: &PassivityIndex,
    w: f64,
    cfg: &ToleranceConfig,
) -> Result<MimoExactCheck> {
    pd_check_mimo_exact_value(&g.eval_jw(w, cfg)?, sigma, cfg)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MimoNecessaryCheck {
    pub holds: bool,
    /// Boundary point of the numerical range at the extremal distance
    /// from the region center (farthest for disks, nearest for
    /// complements).
    #[serde(serialize_with = "crate::serdeutil::cpx")]
    pub worst_point: Complex64,
    /// The range straddles the forbidden boundary within tolerance; the
    /// verdict should not be trusted either way.
    pub inconclusive: bool,
}

/// Necessary MIMO PD check: numerical-range containment in the PD region
/// for sigma_eff = lambda_min(sigma).
pub fn pd_check_mimo_necessary_value(
    m: &CMatrix,
    sigma: &PassivityIndex,
    n_angles: usize,
    cfg: &ToleranceConfig,
) -> Result<MimoNecessaryCheck> {
    if sigma.dim() != m.dim() {
        return Err(Error::Shape {
            msg: "sigma dimension does not match system".into(),
        });
    }
    let i_minus = CMatrix::identity(m.dim()).sub(&m.mul_real(sigma.as_slice()));
    if smallest_singular_value(&i_minus) <= cfg.matrix_singular_guard {
        return Err(Error::SingularTransform {
            msg: "I - G(jw) sigma is singular at the test frequency".into(),
        });
    }
    let s = sigma.lambda_min();
    if s == 0.0 {
        let h = HermitianMatrix::hermitian_part(&m.add(&m.adjoint()));
        let lmin = h.lambda_min();
        let boundary = hermlin::numerical_range(m, n_angles.max(8));
        let worst = boundary
            .boundary_points
            .iter()
            .copied()
            .min_by(|a, b| a.re.partial_cmp(&b.re).unwrap())
            .unwrap_or_default();
        return Ok(MimoNecessaryCheck {
            holds: lmin >= -cfg.psd_rel * (1.0 + h.max_row_sum_norm()),
            worst_point: worst,
            inconclusive: false,
        });
    }

    let c = 1.0 / (2.0 * s);
    let center = Complex64::new(c, 0.0);
    let r = c.abs();
    let tol_abs = cfg.pd_tol * (1.0 + c.abs() + r);
    let boundary = hermlin::numerical_range(m, n_angles.max(8));

    if s > 0.0 {
        let w_rad = hermlin::numerical_radius(&m.sub_scaled_identity(center));
        let worst = boundary
            .boundary_points
            .iter()
            .copied()
            .max_by(|a, b| {
                (a - center)
                    .norm()
                    .partial_cmp(&(b - center).norm())
                    .unwrap()
            })
            .unwrap_or_default();
        Ok(MimoNecessaryCheck {
            holds: w_rad <= r + tol_abs,
            worst_point: worst,
            inconclusive: false,
        })
    } else {
        // sigma_eff < 0: the range must avoid the open disk D(c, r).
        // If the center is inside the range the check fails outright.
        let center_inside = boundary
            .angles
            .iter()
            .zip(&boundary.support_values)
            .all(|(&theta, &h)| (center * Complex64::from_polar(1.0, -theta)).re <= h + tol_abs);
        let min_dist = boundary
            .boundary_points
            .iter()
            .map(|p| (p - center).norm())
            .fold(f64::MAX, f64::min);
        let worst = boundary
            .boundary_points
            .iter()
            .copied()
            .min_by(|a, b| {
                (a - center)
                    .norm()
                    .partial_cmp(&(b - center).norm())
                    .unwrap()
            })
            .unwrap_or_default();
        let holds = !center_inside && min_dist >= r - tol_abs;
        let inconclusive = (min_dist - r).abs() <= tol_abs;
        Ok(MimoNecessaryCheck {
            holds,
            worst_point: worst,
            inconclusive,
        })
    }
}

pub fn pd_check_mimo_necessary(
    g: &RationalMatrix,
    sigma: &PassivityIndex,
    w: f64,
    n_angles: usize,
    cfg: &ToleranceConfig,
) -> Result<MimoNecessaryCheck> {
    pd_check_mimo_necessary_value(&g.eval_jw(w, cfg)?, sigma, n_angles, cfg)
}

/// IF PD check: G + G^H - 2 sigma PSD.
pub fn pd_check_if_value(m: &CMatrix, sigma: &PassivityIndex, cfg: &ToleranceConfig) -> Result<bool> {
    if sigma.dim() != m.dim() {
        return Err(Error::Shape {
            msg: "sigma dimension does not match system".into(),
        });
    }
    let two_sigma = sigma.to_cmatrix().scale(Complex64::new(2.0, 0.0));
    let h = HermitianMatrix::hermitian_part(&m.add(&m.adjoint()).sub(&two_sigma));
    Ok(hermlin::is_psd(&h, cfg.psd_rel))
}

pub fn pd_check_if(
    g: &RationalMatrix,
    sigma: &PassivityIndex,
    w: f64,
    cfg: &ToleranceConfig,
) -> Result<bool> {
    pd_check_if_value(&g.eval_jw(w, cfg)?, sigma, cfg)
}

/// Block PSD formulation for sigma > 0:
/// [[G + G^H, G], [G^H, (2 sigma)^{-1}]] PSD. Agrees with the exact check
/// by the Schur complement.
pub fn schur_block_check_value(
    m: &CMatrix,
    sigma: &PassivityIndex,
    cfg: &ToleranceConfig,
) -> Result<bool> {
    let p = m.dim();
    if sigma.dim() != p {
        return Err(Error::Shape {
            msg: "sigma dimension does not match system".into(),
        });
    }
    let half_inv = sigma.half_inverse()?;
    let i_minus = CMatrix::identity(p).sub(&m.mul_real(sigma.as_slice()));
    if smallest_singular_value(&i_minus) <= cfg.matrix_singular_guard {
        return Err(Error::SingularTransform {
            msg: "I - G(jw) sigma is singular at the test frequency".into(),
        });
    }
    let sum = m.add(&m.adjoint());
    let mut block = CMatrix::zeros(2 * p);
    for i in 0..p {
        for j in 0..p {
            block.set(i, j, sum.get(i, j));
            block.set(i, p + j, m.get(i, j));
            block.set(p + i, j, m.get(j, i).conj());
            block.set(p + i, p + j, Complex64::new(half_inv[i * p + j], 0.0));
        }
    }
    let h = HermitianMatrix::hermitian_part(&block);
    Ok(hermlin::is_psd(&h, cfg.psd_rel))
}

pub fn schur_block_check(
    g: &RationalMatrix,
    sigma: &PassivityIndex,
    w: f64,
    cfg: &ToleranceConfig,
) -> Result<bool> {
    schur_block_check_value(&g.eval_jw(w, cfg)?, sigma, cfg)
}

/// Gain ceiling on the Nichols plane:
/// 20 log10 |G| <= 20 log10 cos(phase) - 20 log10 sigma, valid for
/// |phase| < pi/2; None outside (no finite gain admissible).
pub fn nichols_bound(sigma: f64, phase: f64) -> Result<Option<f64>> {
    if sigma <= 0.0 {
        return Err(Error::SigmaNotPositiveScalar { sigma });
    }
    if phase.abs() >= std::f64::consts::FRAC_PI_2 {
        return Ok(None);
    }
    Ok(Some(20.0 * phase.cos().log10() - 20.0 * sigma.log10()))
}

/// Both orderings of the generalized eigenproblem behind the exact MIMO
/// check, next to the direct PSD verdict. With A = G + G^H and
/// B = G sigma G^H, the PSD condition reads A - 2B >= 0, i.e. the
/// (A, B) pencil eigenvalues on range(B) sit at or above 2 while the
/// reversed (B, A) pencil sits at or below 1/2; reports carry both so a
/// reader can match either convention.
#[derive(Debug, Clone, Serialize)]
pub struct PencilOrderings {
    /// min eigenvalue of A x = lambda B x on range(B), if any.
    pub lambda_min_a_b: Option<f64>,
    /// max eigenvalue of B x = lambda A x on range(A), if any.
    pub lambda_max_b_a: Option<f64>,
    pub a_psd_on_kernel_b: bool,
    /// Ground truth: is_psd(A - 2B).
    pub exact_psd: bool,
    pub note: String,
}

pub fn pd_pencil_report(
    m: &CMatrix,
    sigma: &PassivityIndex,
    cfg: &ToleranceConfig,
) -> Result<PencilOrderings> {
    let a = HermitianMatrix::hermitian_part(&m.add(&m.adjoint()));
    let b_raw = m.mul_real(sigma.as_slice()).mul(&m.adjoint());
    let b = HermitianMatrix::hermitian_part(&b_raw);
    let exact = pd_check_mimo_exact_value(m, sigma, cfg)?;

    let ab = pencil_or_none(&a, &b, cfg);
    let ba = pencil_or_none(&b, &a, cfg);
    Ok(PencilOrderings {
        lambda_min_a_b: ab
            .as_ref()
            .and_then(|r| r.eigenvalues.first().copied()),
        lambda_max_b_a: ba.as_ref().and_then(|r| r.eigenvalues.last().copied()),
        a_psd_on_kernel_b: ab.map(|r| r.a_psd_on_kernel).unwrap_or(true),
        exact_psd: exact.holds,
        note: "PSD condition A - 2B >= 0 corresponds to lambda_min(A,B) >= 2, \
               equivalently lambda_max(B,A) <= 1/2"
            .into(),
    })
}

fn pencil_or_none(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    cfg: &ToleranceConfig,
) -> Option<hermlin::PencilResult> {
    hermlin::pencil_eigs(a, b, cfg).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;
    use approx::assert_relative_eq;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn region_of_disk() {
        let r = pd_region(&PassivityIndex::scalar(1.0 / 3.0), PassivizationMode::Of);
        assert_eq!(r.kind, PDRegionKind::OfDisk);
        assert_relative_eq!(r.center.re, 1.5, max_relative = 1e-15);
        assert_relative_eq!(r.radius, 1.5, max_relative = 1e-15);
    }

    #[test]
    fn region_half_plane_at_zero() {
        let r = pd_region(&PassivityIndex::scalar(0.0), PassivizationMode::Of);
        assert_eq!(r.kind, PDRegionKind::HalfPlaneReNonneg);
        assert!(region_contains(&r, c(0.0, 5.0), 1e-12));
        assert!(!region_contains(&r, c(-1e-6, 0.0), 1e-12));
    }

    #[test]
    fn region_disk_complement() {
        let r = pd_region(&PassivityIndex::scalar(-1.0), PassivizationMode::Of);
        assert_eq!(r.kind, PDRegionKind::OfDiskComplement);
        assert_relative_eq!(r.center.re, -0.5, max_relative = 1e-15);
        assert_relative_eq!(r.radius, 0.5, max_relative = 1e-15);
        assert!(region_contains(&r, c(1.0, 0.0), 1e-12));
        assert!(!region_contains(&r, c(-0.5, 0.1), 1e-12));
    }

    #[test]
    fn region_if_half_plane() {
        let r = pd_region(&PassivityIndex::scalar(0.4), PassivizationMode::If);
        assert_eq!(r.kind, PDRegionKind::IfHalfPlane);
        assert!(region_contains(&r, c(0.5, -3.0), 1e-12));
        assert!(!region_contains(&r, c(0.3, 0.0), 1e-12));
    }

    #[test]
    fn contains_examples() {
        let disk = pd_region(&PassivityIndex::scalar(1.0 / 3.0), PassivizationMode::Of);
        assert!(region_contains(&disk, c(2.0, 0.0), 1e-12));
        assert!(!region_contains(&disk, c(3.0001, 0.0), 1e-12));
        let hp = pd_region(&PassivityIndex::scalar(0.0), PassivizationMode::Of);
        assert!(region_contains(&hp, c(0.0, 0.0), 1e-12));
    }

    #[test]
    fn siso_check_g3() {
        let g3 = systems::g3();
        let r5 = pd_check_siso(&g3, 1.0 / 3.0, 5.0, &cfg()).unwrap();
        assert!(r5.holds);
        // oracle: (Re D - sigma)/|D|^2 with D = (1 + jTw)(d + jMw)
        let d = c(1.0, 0.02 * 5.0) * c(0.5, 0.3 * 5.0);
        let expect = (d.re - 1.0 / 3.0) / d.norm_sqr();
        assert_relative_eq!(r5.margin, expect, max_relative = 1e-12);

        let r6 = pd_check_siso(&g3, 1.0 / 3.0, 6.0, &cfg()).unwrap();
        assert!(!r6.holds);
    }

    #[test]
    fn siso_check_g2_fails_at_zero_sigma() {
        let g2 = systems::g2();
        let r = pd_check_siso(&g2, 0.0, 1.0, &cfg()).unwrap();
        assert!(!r.holds);
    }

    #[test]
    fn siso_pole_propagates() {
        let g2 = systems::g2();
        assert!(pd_check_siso(&g2, 0.0, 0.0, &cfg()).unwrap_err().is_pole());
    }

    #[test]
    fn mimo_exact_g4_at_dc() {
        let g4 = systems::g4();
        let sigma = PassivityIndex::identity_scaled(2, 1.0 / 3.0);
        let r = pd_check_mimo_exact(&g4, &sigma, 0.0, &cfg()).unwrap();
        assert!(r.holds);
        assert!(r.lambda_min_value > 0.0);
    }

    #[test]
    fn mimo_exact_reduces_to_siso_formula() {
        // scalar case: lambda_min value is 2Re(g) - 2 sigma |g|^2
        let g = c(0.7, -1.3);
        let sigma = PassivityIndex::scalar(0.25);
        let m = CMatrix::from_rows(&[vec![g]]).unwrap();
        let r = pd_check_mimo_exact_value(&m, &sigma, &cfg()).unwrap();
        assert_relative_eq!(
            r.lambda_min_value,
            2.0 * (g.re - 0.25 * g.norm_sqr()),
            max_relative = 1e-12
        );
    }

    #[test]
    fn mimo_exact_sigma_zero_is_plain_pd() {
        let g4 = systems::g4();
        let sigma = PassivityIndex::identity_scaled(2, 0.0);
        let r = pd_check_mimo_exact(&g4, &sigma, 0.3, &cfg()).unwrap();
        let m = g4.eval_jw(0.3, &cfg()).unwrap();
        let h = HermitianMatrix::hermitian_part(&m.add(&m.adjoint()));
        assert_eq!(r.holds, hermlin::is_psd(&h, cfg().psd_rel));
    }

    #[test]
    fn schur_block_scalar_example() {
        // p = 1, G = 2, sigma = 1/3: block [[4, 2], [2, 1.5]] is PSD
        let m = CMatrix::from_rows(&[vec![c(2.0, 0.0)]]).unwrap();
        let sigma = PassivityIndex::scalar(1.0 / 3.0);
        assert!(schur_block_check_value(&m, &sigma, &cfg()).unwrap());
    }

    #[test]
    fn schur_block_rejects_singular_sigma() {
        let m = CMatrix::identity(1);
        let sigma = PassivityIndex::scalar(0.0);
        assert!(matches!(
            schur_block_check_value(&m, &sigma, &cfg()),
            Err(Error::SigmaNotPositive { .. })
        ));
    }

    #[test]
    fn schur_block_agrees_with_exact_on_g4() {
        let g4 = systems::g4();
        let sigma = PassivityIndex::identity_scaled(2, 1.0 / 3.0);
        for &w in &[0.1, 1.0, 3.0, 10.0, 50.0] {
            let exact = pd_check_mimo_exact(&g4, &sigma, w, &cfg()).unwrap();
            let schur = schur_block_check(&g4, &sigma, w, &cfg()).unwrap();
            assert_eq!(exact.holds, schur, "disagree at w = {w}");
        }
    }

    #[test]
    fn if_check_g1() {
        let g1m = RationalMatrix::from_scalar(systems::g1());
        let sigma = PassivityIndex::scalar(0.4);
        assert!(pd_check_if(&g1m, &sigma, 0.0, &cfg()).unwrap());
        assert!(!pd_check_if(&g1m, &sigma, 1e4, &cfg()).unwrap());
        let zero = PassivityIndex::scalar(0.0);
        // sigma = 0 reduces to the plain PD condition
        assert!(pd_check_if(&g1m, &zero, 1e4, &cfg()).unwrap());
    }

    #[test]
    fn nichols_bound_values() {
        assert_relative_eq!(
            nichols_bound(0.1, 0.0).unwrap().unwrap(),
            20.0,
            max_relative = 1e-12
        );
        let b = nichols_bound(0.1, std::f64::consts::FRAC_PI_3).unwrap().unwrap();
        assert_relative_eq!(b, 20.0 + 20.0 * 0.5f64.log10(), max_relative = 1e-12);
        assert!(nichols_bound(0.1, std::f64::consts::FRAC_PI_2).unwrap().is_none());
        assert!(nichols_bound(-0.1, 0.0).is_err());
    }

    #[test]
    fn necessary_check_scalar_matches_disk() {
        let sigma = PassivityIndex::scalar(1.0 / 3.0);
        for &(re, im) in &[(2.0, 0.0), (0.1, -0.4), (3.2, 0.0), (1.5, 1.6)] {
            let m = CMatrix::from_rows(&[vec![c(re, im)]]).unwrap();
            let nec = pd_check_mimo_necessary_value(&m, &sigma, 64, &cfg()).unwrap();
            let disk = pd_region(&sigma, PassivizationMode::Of);
            assert_eq!(
                nec.holds,
                region_contains(&disk, c(re, im), cfg().pd_tol),
                "mismatch at {re}+{im}j"
            );
        }
    }

    #[test]
    fn pencil_report_orderings() {
        let g4 = systems::g4();
        let sigma = PassivityIndex::identity_scaled(2, 1.0 / 3.0);
        let m = g4.eval_jw(0.5, &cfg()).unwrap();
        let rep = pd_pencil_report(&m, &sigma, &cfg()).unwrap();
        assert!(rep.exact_psd);
        // Exact PSD means the (A, B) pencil sits at or above 2.
        if let Some(l) = rep.lambda_min_a_b {
            assert!(l >= 2.0 - 1e-7, "lambda_min(A,B) = {l}");
        }
        if let Some(l) = rep.lambda_max_b_a {
            assert!(l <= 0.5 + 1e-7, "lambda_max(B,A) = {l}");
        }
    }
}
