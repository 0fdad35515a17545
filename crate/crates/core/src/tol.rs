//! Centralized numerical tolerances.
//!
//! Every threshold used by the analysis operations lives here so that two
//! commands run with the same config produce the same verdicts.

/// Tolerance bundle shared by all analysis operations.
#[derive(Debug, Clone)]
pub struct ToleranceConfig {
    /// Minimum |den(s)| before an evaluation point counts as a pole.
    pub pole_guard: f64,
    /// Smallest |1 - sigma*G(jw)| treated as nonsingular (scalar checks).
    pub singular_guard: f64,
    /// Smallest singular value of I - G(jw)*sigma treated as nonsingular.
    pub matrix_singular_guard: f64,
    /// Relative PSD slack: PSD iff lambda_min >= -psd_rel * (1 + norm).
    pub psd_rel: f64,
    /// Generic PD margin slack for holds/fails decisions.
    pub pd_tol: f64,
    /// Root polish target: scaled residual of each root must fall below this.
    pub root_residual: f64,
    /// Stability classification scale: tol = stab_scale * (1 + max|root|).
    pub stab_scale: f64,
    /// Relative distance below which a pole/zero pair is flagged as a
    /// near-cancellation (never cancelled automatically).
    pub cancel_warn: f64,
    /// Band-edge bisection target, relative: |dw|/w.
    pub band_refine_rel: f64,
    /// Containment margin below which a passivity verdict becomes
    /// boundary-inconclusive instead of passive.
    pub boundary_margin: f64,
    /// Maximum distance of the accumulated winding sum from an integer.
    pub winding_residual: f64,
    /// Minimum distance of the Nyquist curve from a winding test point.
    pub curve_point_guard: f64,
    /// Slack for the axis-pole residue nonnegativity test.
    pub residue_tol: f64,
    /// Rank threshold for pencil range splitting: rank_rel * norm(B).
    pub rank_rel: f64,
    /// Absolute Hermitian symmetry check on construction.
    pub herm_sym_tol: f64,
    /// Quadrature convergence target for the conservation integral.
    pub quad_tol: f64,
    /// Golden-section refinement target (relative) for distance extrema.
    pub refine_rel: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            pole_guard: 1e-300,
            singular_guard: 1e-12,
            matrix_singular_guard: 1e-10,
            psd_rel: 1e-9,
            pd_tol: 1e-9,
            root_residual: 1e-8,
            stab_scale: 1e-9,
            cancel_warn: 1e-8,
            band_refine_rel: 1e-8,
            boundary_margin: 1e-7,
            winding_residual: 0.05,
            curve_point_guard: 1e-9,
            residue_tol: 1e-9,
            rank_rel: 1e-10,
            herm_sym_tol: 1e-12,
            quad_tol: 1e-8,
            refine_rel: 1e-9,
        }
    }
}
