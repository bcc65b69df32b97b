//! Fluid and solver configuration shared across modules.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WaveError};

/// Bottom boundary: flat at y = -h, or absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Depth {
    Finite(f64),
    Infinite,
}

impl Depth {
    pub fn is_finite(&self) -> bool {
        matches!(self, Depth::Finite(_))
    }
}

/// Physical constants of one run. `period_x` is the horizontal period X.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FluidConfig {
    pub gravity: f64,
    pub surface_tension: f64,
    pub depth: Depth,
    pub period_x: f64,
}

impl FluidConfig {
    pub fn new(gravity: f64, surface_tension: f64, depth: Depth, period_x: f64) -> Result<Self> {
        let cfg = Self {
            gravity,
            surface_tension,
            depth,
            period_x,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gravity.is_finite() && self.gravity >= 0.0) {
            return Err(WaveError::Config(format!(
                "gravity must be finite and >= 0, got {}",
                self.gravity
            )));
        }
        if !(self.surface_tension.is_finite() && self.surface_tension >= 0.0) {
            return Err(WaveError::Config(format!(
                "surface tension must be finite and >= 0, got {}",
                self.surface_tension
            )));
        }
        if !(self.period_x.is_finite() && self.period_x > 0.0) {
            return Err(WaveError::Config(format!(
                "period_x must be finite and > 0, got {}",
                self.period_x
            )));
        }
        if let Depth::Finite(h) = self.depth {
            if !(h.is_finite() && h > 0.0) {
                return Err(WaveError::Config(format!(
                    "finite depth must be > 0, got {h}"
                )));
            }
        }
        Ok(())
    }

    /// Convenience: unit gravity, no surface tension, infinite depth, X = 2*pi.
    pub fn deep_unit() -> Self {
        Self {
            gravity: 1.0,
            surface_tension: 0.0,
            depth: Depth::Infinite,
            period_x: 2.0 * std::f64::consts::PI,
        }
    }
}

/// Settings for the graph-chart operator-expansion solver.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DnoGraphSettings {
    /// Highest retained power of eta; order 0 keeps the flat-surface operator.
    pub expansion_order: usize,
}

pub const MAX_EXPANSION_ORDER: usize = 12;

impl Default for DnoGraphSettings {
    fn default() -> Self {
        Self { expansion_order: 6 }
    }
}

impl DnoGraphSettings {
    pub fn validate(&self) -> Result<()> {
        if self.expansion_order > MAX_EXPANSION_ORDER {
            return Err(WaveError::Config(format!(
                "expansion order {} exceeds {}",
                self.expansion_order, MAX_EXPANSION_ORDER
            )));
        }
        Ok(())
    }
}

/// Settings for the boundary-integral solver.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DnoBieSettings {
    /// Run the chord-arc / bottom-clearance diagnostic before assembling.
    pub check_geometry: bool,
    /// Reject chord/arc ratios below this when checking geometry.
    pub min_chord_arc: f64,
    /// Floor for log-kernel arguments; values at or below it mean the curve
    /// effectively touches itself or the bottom image.
    pub regularization_eps: f64,
}

impl Default for DnoBieSettings {
    fn default() -> Self {
        Self {
            check_geometry: true,
            min_chord_arc: 0.01,
            regularization_eps: 1e-14,
        }
    }
}
