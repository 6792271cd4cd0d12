//! Lorentzian inhomogeneous lineshape.

use serde::{Deserialize, Serialize};

use super::ModelFn;
use crate::error::{Error, Result};
use crate::fitting::Dataset;

/// Parameters of baseline + peak·(Γ/2)²/((ν−ν₀)² + (Γ/2)²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianParams {
    /// Line center ν₀, GHz.
    pub center_ghz: f64,
    /// Full width at half maximum Γ_inh, GHz, > 0.
    pub fwhm_ghz: f64,
    /// Peak amplitude above baseline (arb.), > 0.
    pub peak: f64,
    /// Constant baseline (arb.).
    pub baseline: f64,
}

impl LorentzianParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm_ghz > 0.0) {
            return Err(Error::domain(format!("FWHM must be > 0, got {}", self.fwhm_ghz)));
        }
        if !(self.peak > 0.0) {
            return Err(Error::domain(format!("peak must be > 0, got {}", self.peak)));
        }
        Ok(())
    }
}

/// Lineshape amplitude at frequency `nu_ghz`, with partials with respect to
/// (center, fwhm, peak, baseline).
pub fn lorentzian(nu_ghz: f64, p: &LorentzianParams) -> Result<(f64, [f64; 4])> {
    p.validate()?;
    Ok(eval(nu_ghz, &[p.center_ghz, p.fwhm_ghz, p.peak, p.baseline]))
}

fn eval(nu: f64, p: &[f64]) -> (f64, [f64; 4]) {
    let [center, fwhm, peak, baseline] = [p[0], p[1], p[2], p[3]];
    let h = fwhm / 2.0;
    let d = nu - center;
    let denom = d * d + h * h;
    let shape = h * h / denom;
    let value = baseline + peak * shape;
    let denom2 = denom * denom;
    let d_center = peak * 2.0 * d * h * h / denom2;
    let d_fwhm = peak * h * d * d / denom2;
    (value, [d_center, d_fwhm, shape, 1.0])
}

/// [`ModelFn`] adapter; parameters `[center_ghz, fwhm_ghz, peak, baseline]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LorentzianModel;

impl ModelFn for LorentzianModel {
    fn name(&self) -> &'static str {
        "lorentzian"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["center_ghz", "fwhm_ghz", "peak", "baseline"]
    }

    fn param_units(&self) -> &'static [&'static str] {
        &["GHz", "GHz", "arb", "arb"]
    }

    fn value(&self, x: f64, p: &[f64]) -> f64 {
        eval(x, p).0
    }

    fn value_and_partials(&self, x: f64, p: &[f64], dp: &mut [f64]) -> f64 {
        let (v, d) = eval(x, p);
        dp.copy_from_slice(&d);
        v
    }

    fn default_bounds(&self) -> Vec<(f64, f64)> {
        vec![
            (f64::NEG_INFINITY, f64::INFINITY),
            (1e-12, f64::INFINITY),
            (1e-12, f64::INFINITY),
            (f64::NEG_INFINITY, f64::INFINITY),
        ]
    }

    /// Center from the argmax, FWHM from the half-maximum crossings,
    /// baseline from the minimum.
    fn guess(&self, data: &Dataset) -> Vec<f64> {
        let x = data.x();
        let y = data.y();
        let (i_max, y_max) = y
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, &v)| (i, v))
            .unwrap();
        let baseline = y.iter().cloned().fold(f64::INFINITY, f64::min);
        let peak = (y_max - baseline).max(1e-12);
        let half = baseline + peak / 2.0;
        let left = x[..i_max]
            .iter()
            .zip(&y[..i_max])
            .rev()
            .find(|(_, &v)| v < half)
            .map(|(&nu, _)| nu);
        let right = x[i_max..]
            .iter()
            .zip(&y[i_max..])
            .find(|(_, &v)| v < half)
            .map(|(&nu, _)| nu);
        let fwhm = match (left, right) {
            (Some(l), Some(r)) => (r - l).max(1e-12),
            _ => ((x[data.len() - 1] - x[0]) / 4.0).max(1e-12),
        };
        vec![x[i_max], fwhm, peak, baseline]
    }
}
