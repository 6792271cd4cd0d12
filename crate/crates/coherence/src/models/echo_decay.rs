//! Stretched-exponential (Mims) two-pulse photon-echo decay.

use serde::{Deserialize, Serialize};

use super::ModelFn;
use crate::error::{Error, Result};
use crate::fitting::Dataset;

/// Parameters of the echo decay A(τ) = A₀·exp[−(2τ/T₂)^x].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MimsParams {
    /// Zero-delay echo amplitude A₀ (arb. units), > 0.
    pub amp: f64,
    /// Optical coherence time T₂ in µs, > 0.
    pub t2_us: f64,
    /// Stretch exponent x, within [0.5, 3.0].
    pub stretch: f64,
}

impl MimsParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.amp > 0.0) {
            return Err(Error::domain(format!("amplitude must be > 0, got {}", self.amp)));
        }
        if !(self.t2_us > 0.0) {
            return Err(Error::domain(format!("T2 must be > 0, got {} us", self.t2_us)));
        }
        if !(0.5..=3.0).contains(&self.stretch) {
            return Err(Error::domain(format!(
                "stretch exponent must lie in [0.5, 3.0], got {}",
                self.stretch
            )));
        }
        Ok(())
    }
}

/// Echo amplitude at pulse separation `tau_us`, with partials with respect
/// to (A₀, T₂, x).
///
/// ∂/∂x at τ = 0 is defined as 0 (its limit).
pub fn mims_decay(tau_us: f64, p: &MimsParams) -> Result<(f64, [f64; 3])> {
    p.validate()?;
    if tau_us < 0.0 || !tau_us.is_finite() {
        return Err(Error::domain(format!("delay must be >= 0, got {tau_us} us")));
    }
    Ok(eval(tau_us, p.amp, p.t2_us, p.stretch))
}

fn eval(tau: f64, amp: f64, t2: f64, x: f64) -> (f64, [f64; 3]) {
    if tau == 0.0 {
        return (amp, [1.0, 0.0, 0.0]);
    }
    let u = 2.0 * tau / t2;
    let ux = u.powf(x);
    // exp(-745) underflows to 0; past that point u^x·exp(-u^x) is 0·inf.
    if !ux.is_finite() || ux > 745.0 {
        return (0.0, [0.0, 0.0, 0.0]);
    }
    let e = (-ux).exp();
    let value = amp * e;
    let d_amp = e;
    let d_t2 = amp * e * x * ux / t2;
    let d_x = -amp * e * ux * u.ln();
    (value, [d_amp, d_t2, d_x])
}

/// [`ModelFn`] adapter for [`mims_decay`]; parameters `[amp, t2_us, stretch]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Mims;

impl ModelFn for Mims {
    fn name(&self) -> &'static str {
        "mims_decay"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["amp", "t2_us", "stretch"]
    }

    fn param_units(&self) -> &'static [&'static str] {
        &["arb", "us", "1"]
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if x < 0.0 || !x.is_finite() {
            return Err(Error::domain(format!("delay must be >= 0, got {x} us")));
        }
        Ok(())
    }

    fn value(&self, x: f64, p: &[f64]) -> f64 {
        eval(x, p[0], p[1], p[2]).0
    }

    fn value_and_partials(&self, x: f64, p: &[f64], dp: &mut [f64]) -> f64 {
        let (v, d) = eval(x, p[0], p[1], p[2]);
        dp.copy_from_slice(&d);
        v
    }

    fn default_bounds(&self) -> Vec<(f64, f64)> {
        vec![(1e-12, f64::INFINITY), (1e-6, f64::INFINITY), (0.5, 3.0)]
    }

    /// A₀ from the earliest point, T₂ from the 1/e crossing, x = 1.2.
    fn guess(&self, data: &Dataset) -> Vec<f64> {
        let amp = data.y()[0].abs().max(1e-12);
        let target = amp / std::f64::consts::E;
        let t2 = data
            .x()
            .iter()
            .zip(data.y())
            .find(|(_, &y)| y < target)
            .map(|(&tau, _)| 2.0 * tau)
            .unwrap_or_else(|| 2.0 * data.x()[data.len() - 1]);
        vec![amp, t2.max(1e-6), 1.2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(amp: f64, t2: f64, x: f64) -> MimsParams {
        MimsParams { amp, t2_us: t2, stretch: x }
    }

    #[test]
    fn zero_delay_identity() {
        let (v, d) = mims_decay(0.0, &params(2.5, 100.0, 1.7)).unwrap();
        assert_eq!(v, 2.5);
        assert_eq!(d, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn e_folding_point() {
        // τ = T₂/2 with x = 1 gives A₀/e.
        let (v, _) = mims_decay(50.0, &params(3.0, 100.0, 1.0)).unwrap();
        assert_relative_eq!(v, 3.0 * (-1.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn paper_t2_evaluation() {
        // 2τ/T₂ = 1 at τ = 210.75 µs for T₂ = 421.5 µs.
        let (v, _) = mims_decay(210.75, &params(1.0, 421.5, 1.0)).unwrap();
        assert_relative_eq!(v, 0.36788, max_relative = 1e-4);
    }

    #[test]
    fn rejects_negative_delay() {
        assert!(mims_decay(-1.0, &params(1.0, 100.0, 1.0)).is_err());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(mims_decay(1.0, &params(0.0, 100.0, 1.0)).is_err());
        assert!(mims_decay(1.0, &params(1.0, -5.0, 1.0)).is_err());
        assert!(mims_decay(1.0, &params(1.0, 100.0, 3.5)).is_err());
    }

    #[test]
    fn monotone_nonincreasing_in_tau() {
        let p = params(1.0, 421.5, 1.8);
        let mut last = f64::INFINITY;
        for i in 0..200 {
            let tau = i as f64 * 5.0;
            let (v, _) = mims_decay(tau, &p).unwrap();
            assert!(v <= last + 1e-15);
            last = v;
        }
    }

    #[test]
    fn deep_decay_underflows_to_zero() {
        let (v, d) = mims_decay(1e6, &params(1.0, 1.0, 3.0)).unwrap();
        assert_eq!(v, 0.0);
        assert!(d.iter().all(|&g| g == 0.0));
    }
}
