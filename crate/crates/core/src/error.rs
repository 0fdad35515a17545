//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {msg}")]
    Syntax { offset: usize, msg: String },

    #[error("zero denominator polynomial")]
    ZeroDenominator,

    #[error("non-rational construct at byte {offset}: {msg}")]
    NonRational { offset: usize, msg: String },

    #[error("shape error: {msg}")]
    Shape { msg: String },

    #[error("unknown parameter `{name}`")]
    UnknownParameter { name: String },

    #[error("entry ({row},{col}): {source}")]
    Entry {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("pole at s = {re}+{im}j (|den| = {den_mag:.3e}){}", entry.map(|(r, c)| format!(" in entry ({r},{c})")).unwrap_or_default())]
    PoleAt {
        re: f64,
        im: f64,
        den_mag: f64,
        entry: Option<(usize, usize)>,
    },

    #[error("singular transform: {msg}")]
    SingularTransform { msg: String },

    #[error("degree-zero polynomial has no roots")]
    DegreeZero,

    #[error("eigenvalue iteration did not converge")]
    NotConverged,

    #[error("pencil base matrix is indefinite (lambda_min = {lambda_min:.3e})")]
    IndefinitePencil { lambda_min: f64 },

    #[error("passivity index must be positive definite (lambda_min = {lambda_min:.3e})")]
    SigmaNotPositive { lambda_min: f64 },

    #[error("sigma must be positive, got {sigma}")]
    SigmaNotPositiveScalar { sigma: f64 },

    #[error("Nyquist curve passes through the test point (min distance {min_dist:.3e})")]
    CurveThroughPoint { min_dist: f64 },

    #[error("winding residual {residual:.3} exceeds 0.05; grid too coarse")]
    WindingResidual { residual: f64 },

    #[error("repeated imaginary-axis pole near jw = {frequency}")]
    RepeatedAxisPole { frequency: f64 },

    #[error("transfer function is not strictly proper")]
    NotStrictlyProper,

    #[error("transfer function is not minimal phase")]
    NotMinimalPhase,

    #[error("empty frequency grid")]
    EmptyGrid,

    #[error("all grid points are poles")]
    AllPoles,

    #[error("index ordering violated: sigma2 - sigma1 must be positive definite")]
    OrderingViolated,

    #[error("no PD failure found in the scanned range")]
    NoFailure,

    #[error("quadrature did not converge: {msg}")]
    QuadratureDiverged { msg: String },

    #[error("premise violated at w = {witness}: value {value} below requirement {requirement}")]
    PremiseViolated {
        witness: f64,
        value: f64,
        requirement: f64,
    },

    #[error("invalid grid: {msg}")]
    InvalidGrid { msg: String },

    #[error("invalid input: {msg}")]
    Invalid { msg: String },

    #[error("system file JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attach a matrix entry position to a pole error.
    pub(crate) fn with_entry(self, row: usize, col: usize) -> Error {
        match self {
            Error::PoleAt {
                re, im, den_mag, ..
            } => Error::PoleAt {
                re,
                im,
                den_mag,
                entry: Some((row, col)),
            },
            other => Error::Entry {
                row,
                col,
                source: Box::new(other),
            },
        }
    }

    pub fn is_pole(&self) -> bool {
        matches!(self, Error::PoleAt { .. })
    }
}
