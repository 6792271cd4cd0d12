//! Sampled optical-depth profile αL(ω) on a simulation grid.

use super::grid::FreqGrid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionProfile {
    grid: FreqGrid,
    alpha_l: Vec<f64>,
}

impl AbsorptionProfile {
    pub fn new(grid: FreqGrid, alpha_l: Vec<f64>) -> Result<Self> {
        if alpha_l.len() != grid.n() {
            return Err(Error::argument(format!(
                "profile has {} samples for a grid of {}",
                alpha_l.len(),
                grid.n()
            )));
        }
        if let Some(bad) = alpha_l.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::argument(format!(
                "optical depth must be finite and >= 0, got {bad}"
            )));
        }
        Ok(AbsorptionProfile { grid, alpha_l })
    }

    /// Sample αL(f) from a function of the centered detuning in MHz.
    pub fn from_fn(grid: FreqGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let alpha = (0..grid.n()).map(|i| f(grid.freq_at(i))).collect();
        Self::new(grid, alpha)
    }

    pub fn grid(&self) -> &FreqGrid {
        &self.grid
    }

    pub fn alpha_l(&self) -> &[f64] {
        &self.alpha_l
    }

    /// Mean optical depth over |f| <= half_width.
    pub fn mean_depth_within(&self, half_width_mhz: f64) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..self.grid.n() {
            if self.grid.freq_at(i).abs() <= half_width_mhz {
                sum += self.alpha_l[i];
                count += 1;
            }
        }
        if count > 0 {
            sum / count as f64
        } else {
            0.0
        }
    }
}
