//! Frequency grid specification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    Log,
    Linear,
}

/// Frequency sweep description in rad/s.
///
/// Log grids are aligned to exact decade fractions: every point is
/// 10^(k / points_per_decade) for integer k, so sweeps with the same
/// points_per_decade share sample points regardless of the window.
/// For linear grids `points_per_decade` is reinterpreted as the total
/// number of points across the window.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub w_min: f64,
    pub w_max: f64,
    pub points_per_decade: u32,
    pub scale: GridScale,
}

impl GridSpec {
    pub fn log(w_min: f64, w_max: f64, points_per_decade: u32) -> Result<Self> {
        let g = GridSpec {
            w_min,
            w_max,
            points_per_decade,
            scale: GridScale::Log,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn linear(w_min: f64, w_max: f64, n_points: u32) -> Result<Self> {
        let g = GridSpec {
            w_min,
            w_max,
            points_per_decade: n_points,
            scale: GridScale::Linear,
        };
        g.validate()?;
        Ok(g)
    }

    /// Default band grid: 1e-3 to 1e3 rad/s at 100 points per decade.
    pub fn default_band() -> Self {
        GridSpec {
            w_min: 1e-3,
            w_max: 1e3,
            points_per_decade: 100,
            scale: GridScale::Log,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w_min.is_finite() && self.w_max.is_finite()) || self.w_min >= self.w_max {
            return Err(Error::InvalidGrid {
                msg: format!("w_min {} must be below finite w_max {}", self.w_min, self.w_max),
            });
        }
        match self.scale {
            GridScale::Log => {
                if self.w_min <= 0.0 {
                    return Err(Error::InvalidGrid {
                        msg: "log grid requires w_min > 0 (w = 0 is sampled separately)".into(),
                    });
                }
                if self.points_per_decade < 10 {
                    return Err(Error::InvalidGrid {
                        msg: format!(
                            "points_per_decade {} below minimum 10",
                            self.points_per_decade
                        ),
                    });
                }
            }
            GridScale::Linear => {
                if self.points_per_decade < 2 {
                    return Err(Error::InvalidGrid {
                        msg: "linear grid needs at least 2 points".into(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Strictly positive sample frequencies, ascending. Does not include w = 0.
    pub fn points(&self) -> Vec<f64> {
        match self.scale {
            GridScale::Log => {
                let ppd = f64::from(self.points_per_decade);
                let k_min = (self.w_min.log10() * ppd - 1e-9).ceil() as i64;
                let k_max = (self.w_max.log10() * ppd + 1e-9).floor() as i64;
                let mut ws: Vec<f64> = (k_min..=k_max)
                    .map(|k| 10f64.powf(k as f64 / ppd))
                    .collect();
                if ws.first().is_none_or(|&w| w > self.w_min * (1.0 + 1e-12)) {
                    ws.insert(0, self.w_min);
                }
                if ws.last().is_none_or(|&w| w < self.w_max * (1.0 - 1e-12)) {
                    ws.push(self.w_max);
                }
                ws
            }
            GridScale::Linear => {
                let n = self.points_per_decade as usize;
                let step = (self.w_max - self.w_min) / (n - 1) as f64;
                (0..n).map(|i| self.w_min + step * i as f64).collect()
            }
        }
    }

    /// Same grid with twice the density (used by refinement-invariance checks).
    pub fn doubled(&self) -> Self {
        GridSpec {
            points_per_decade: self.points_per_decade * 2,
            ..*self
        }
    }
}
