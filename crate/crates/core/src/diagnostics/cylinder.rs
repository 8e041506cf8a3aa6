use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::Grid;

/// `Q_{z0,r} = B(x0, r) × (t0 - r², t0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicCylinder {
    pub center_x: [f64; 3],
    pub center_t: f64,
    pub radius: f64,
}

impl ParabolicCylinder {
    pub fn new(center_x: [f64; 3], center_t: f64, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid(format!("cylinder radius must be positive, got {radius}")));
        }
        if !center_t.is_finite() || center_t - radius * radius < -1e-12 * center_t.abs().max(1.0) {
            return Err(invalid(format!(
                "cylinder starts before t = 0: center_t {center_t}, radius² {}",
                radius * radius
            )));
        }
        if center_x.iter().any(|v| !v.is_finite()) {
            return Err(invalid("cylinder center must be finite"));
        }
        Ok(Self {
            center_x,
            center_t,
            radius,
        })
    }

    /// Start of the time interval, `t0 - r²`.
    pub fn t_start(&self) -> f64 {
        (self.center_t - self.radius * self.radius).max(0.0)
    }

    /// The concentric cylinder `Q_{z0, r/2}`.
    pub fn half(&self) -> Self {
        Self {
            radius: 0.5 * self.radius,
            ..*self
        }
    }

    pub(crate) fn check_fits(&self, grid: &Grid) -> Result<()> {
        check_radius(grid, self.radius)
    }
}

/// `Q̃_{x0,r} = B(x0, r) × (0, r²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TildeCylinder {
    pub center_x: [f64; 3],
    pub radius: f64,
}

impl TildeCylinder {
    pub fn new(center_x: [f64; 3], radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid(format!("cylinder radius must be positive, got {radius}")));
        }
        Ok(Self { center_x, radius })
    }
}

pub(crate) fn check_radius(grid: &Grid, radius: f64) -> Result<()> {
    let limit = grid.max_ball_radius();
    if radius >= limit {
        return Err(Error::BallTooLarge { radius, limit });
    }
    Ok(())
}

/// Outcome of the smallness test `value < ε₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Small,
    NotSmall,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Small => "small",
            Classification::NotSmall => "not_small",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const DEFAULT_EPS0: f64 = 0.05;

/// `small` iff `value < eps0`.
///
/// A small value certifies regularity of the half cylinder only under the
/// hypotheses of the partial-regularity criterion and for the `ε₀` chosen;
/// the criterion asserts that some `ε₀` exists but gives no number.
pub fn classify_point(value: f64, eps0: f64) -> Classification {
    if value < eps0 {
        Classification::Small
    } else {
        Classification::NotSmall
    }
}
