//! Double-exponential spectral-hole area decay and the spin-coherence bound.

use serde::{Deserialize, Serialize};

use super::ModelFn;
use crate::error::{Error, Result};
use crate::fitting::Dataset;

/// Parameters of A₁·e^(−t/τ₁) + A₂·e^(−t/τ₂), with the canonical ordering
/// τ₁ ≤ τ₂ (τ₂ is the long-lived component).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleExpParams {
    /// Fast-component amplitude (arb.), >= 0.
    pub a1: f64,
    /// Fast lifetime τ₁ in hours, > 0.
    pub tau1_h: f64,
    /// Slow-component amplitude (arb.), >= 0.
    pub a2: f64,
    /// Slow lifetime τ₂ in hours, > 0.
    pub tau2_h: f64,
}

impl DoubleExpParams {
    pub fn validate(&self) -> Result<()> {
        if self.a1 < 0.0 || self.a2 < 0.0 {
            return Err(Error::domain("amplitudes must be >= 0".to_string()));
        }
        if !(self.tau1_h > 0.0) || !(self.tau2_h > 0.0) {
            return Err(Error::domain("lifetimes must be > 0".to_string()));
        }
        Ok(())
    }
}

/// Hole area at delay `t_h` (hours), with partials with respect to
/// (A₁, τ₁, A₂, τ₂).
pub fn double_exp(t_h: f64, p: &DoubleExpParams) -> Result<(f64, [f64; 4])> {
    p.validate()?;
    if t_h < 0.0 || !t_h.is_finite() {
        return Err(Error::domain(format!("delay must be >= 0, got {t_h} h")));
    }
    Ok(eval(t_h, &[p.a1, p.tau1_h, p.a2, p.tau2_h]))
}

fn eval(t: f64, p: &[f64]) -> (f64, [f64; 4]) {
    let [a1, tau1, a2, tau2] = [p[0], p[1], p[2], p[3]];
    let e1 = (-t / tau1).exp();
    let e2 = (-t / tau2).exp();
    let value = a1 * e1 + a2 * e2;
    let d = [e1, a1 * e1 * t / (tau1 * tau1), e2, a2 * e2 * t / (tau2 * tau2)];
    (value, d)
}

/// Theoretical spin coherence bound T₂,s = 2·T₁,s (hours).
pub fn spin_t2_bound(t1s_h: f64) -> Result<f64> {
    if !(t1s_h > 0.0) {
        return Err(Error::domain(format!("lifetime must be > 0, got {t1s_h} h")));
    }
    Ok(2.0 * t1s_h)
}

/// [`ModelFn`] adapter; parameters `[a1, tau1_h, a2, tau2_h]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DoubleExpModel;

impl ModelFn for DoubleExpModel {
    fn name(&self) -> &'static str {
        "double_exp"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["a1", "tau1_h", "a2", "tau2_h"]
    }

    fn param_units(&self) -> &'static [&'static str] {
        &["arb", "h", "arb", "h"]
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if x < 0.0 || !x.is_finite() {
            return Err(Error::domain(format!("delay must be >= 0, got {x} h")));
        }
        Ok(())
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
            (0.0, f64::INFINITY),
            (1e-9, f64::INFINITY),
            (0.0, f64::INFINITY),
            (1e-9, f64::INFINITY),
        ]
    }

    /// Split the zero-delay amplitude evenly; τ₂ from the log-slope of the
    /// last third of the decay, τ₁ a decade faster.
    fn guess(&self, data: &Dataset) -> Vec<f64> {
        let x = data.x();
        let y = data.y();
        let n = data.len();
        let a_total = y[0].max(1e-12);
        let i0 = (2 * n / 3).min(n - 2);
        let (xa, xb) = (x[i0], x[n - 1]);
        let (ya, yb) = (y[i0].max(1e-12 * a_total), y[n - 1].max(1e-12 * a_total));
        let tau2 = if xb > xa && yb < ya {
            (xb - xa) / (ya / yb).ln()
        } else {
            (xb - x[0]).max(1e-9)
        };
        vec![a_total / 2.0, tau2 / 10.0, a_total / 2.0, tau2]
    }

    /// Swap the two components if they came out with τ₁ > τ₂.
    fn canonical_permutation(&self, params: &[f64]) -> Option<Vec<usize>> {
        if params[1] > params[3] {
            Some(vec![2, 3, 0, 1])
        } else {
            None
        }
    }
}
