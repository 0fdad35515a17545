//! Geometric passivization analysis for LTI systems.
//!
//! The toolkit decides whether a transfer function (scalar or square
//! matrix) can be rendered passive through output-feedback or
//! input-feedforward loops with a given passivity index, by testing
//! positive-damping conditions geometrically: the Nyquist locus (SISO) or
//! the numerical range of the frequency response (MIMO) must stay inside
//! an index-dependent region of the complex plane. On top of the
//! frequency-wise checks it computes PD frequency bands with refined
//! edges, full passivity verdicts with winding-number and residue
//! evidence, robustness margins against additive perturbations, and the
//! conservation identity that limits how much damping can be demanded
//! across the spectrum.

// Indexed loops over small dense matrices are the house style here.
#![allow(clippy::needless_range_loop)]

pub mod bands;
pub mod cmatrix;
pub mod error;
pub mod genpass;
pub mod grid;
pub mod hermlin;
pub mod margins;
pub mod passivity;
pub mod pdcore;
pub mod ratpoly;
mod serdeutil;
pub mod systems;
pub mod tfparse;
pub mod tol;

pub use bands::{BandMode, FrequencyBand};
pub use error::{Error, Result};
pub use grid::{GridScale, GridSpec};
pub use pdcore::{PDRegion, PDRegionKind, PassivityIndex, PassivizationMode};
pub use ratpoly::{Classification, InverseDecomposition, Polynomial, RationalFunction, RationalMatrix};
pub use passivity::{PassivityReport, Verdict};
pub use tol::ToleranceConfig;
