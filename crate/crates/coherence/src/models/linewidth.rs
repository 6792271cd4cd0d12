//! Homogeneous linewidth versus temperature and versus magnetic field.
//!
//! The temperature model combines residual broadening, a sech² spectral
//! diffusion term from thermally polarizable perturbing centers, a linear
//! two-level-system term, and a T⁷ two-phonon Raman term:
//!
//! Γ_h(T) = Γ₀ + A·sech²(ξ_half/T) + α_TLS·T + α_TPR·T⁷
//!
//! where ξ_half = ξ/2k_B is stored directly in kelvin — it is the quantity
//! the measurements constrain and it keeps the parameter O(1).
//!
//! The field model at fixed temperature is Γ_h(B) = Γ₀ + A·sech²(ξ/2k_B·T)
//! with ξ = g_env·µ_B·B.

use serde::{Deserialize, Serialize};

use super::{sech2_with_derivative, ModelFn};
use crate::error::{Error, Result};
use crate::fitting::Dataset;
use crate::quantities::{zeeman_half_splitting, BOHR_MAGNETON_OVER_KB};

/// Parameters of Γ_h(T); all non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinewidthTempParams {
    /// Residual homogeneous broadening Γ₀, kHz.
    pub gamma0_khz: f64,
    /// sech² amplitude A, kHz.
    pub amp_khz: f64,
    /// Half energy splitting of the perturbing centers, ξ/2k_B, in K.
    pub xi_half_k: f64,
    /// TLS coupling constant, kHz/K.
    pub alpha_tls: f64,
    /// Two-phonon-Raman coupling constant, kHz/K⁷.
    pub alpha_tpr: f64,
}

impl LinewidthTempParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gamma0", self.gamma0_khz),
            ("amplitude", self.amp_khz),
            ("xi_half", self.xi_half_k),
            ("alpha_tls", self.alpha_tls),
            ("alpha_tpr", self.alpha_tpr),
        ];
        for (name, v) in fields {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Parameters of Γ_h(B) at fixed temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinewidthFieldParams {
    /// Residual homogeneous broadening Γ₀, kHz, >= 0.
    pub gamma0_khz: f64,
    /// sech² amplitude A, kHz, >= 0.
    pub amp_khz: f64,
    /// Effective g-factor of the perturbing centers, >= 0.
    pub g_env: f64,
    /// Measurement temperature in K, > 0. Not a fit parameter.
    pub t_fixed_k: f64,
}

impl LinewidthFieldParams {
    pub fn validate(&self) -> Result<()> {
        if self.gamma0_khz < 0.0 || !self.gamma0_khz.is_finite() {
            return Err(Error::domain("gamma0 must be >= 0".to_string()));
        }
        if self.amp_khz < 0.0 || !self.amp_khz.is_finite() {
            return Err(Error::domain("amplitude must be >= 0".to_string()));
        }
        if self.g_env < 0.0 || !self.g_env.is_finite() {
            return Err(Error::domain("g_env must be >= 0".to_string()));
        }
        if !(self.t_fixed_k > 0.0) {
            return Err(Error::domain(format!(
                "temperature must be > 0, got {} K",
                self.t_fixed_k
            )));
        }
        Ok(())
    }
}

/// Fitted TLS couplings below this (kHz/K) are indistinguishable from zero
/// and reported as eliminated.
pub const TLS_ELIMINATED_THRESHOLD: f64 = 1e-4;

/// Whether a fitted α_TLS counts as eliminated.
pub fn tls_eliminated(alpha_tls_khz_per_k: f64) -> bool {
    alpha_tls_khz_per_k < TLS_ELIMINATED_THRESHOLD
}

/// Γ_h at temperature `temp_k`, with partials with respect to
/// (Γ₀, A, ξ_half, α_TLS, α_TPR).
///
/// The T→0⁺ limit Γ₀ is a property of the model, not an evaluable point:
/// `temp_k` must be strictly positive.
pub fn gamma_h_vs_t(temp_k: f64, p: &LinewidthTempParams) -> Result<(f64, [f64; 5])> {
    p.validate()?;
    if !(temp_k > 0.0) {
        return Err(Error::domain(format!("temperature must be > 0, got {temp_k} K")));
    }
    Ok(eval_temp(
        temp_k,
        &[p.gamma0_khz, p.amp_khz, p.xi_half_k, p.alpha_tls, p.alpha_tpr],
    ))
}

fn eval_temp(t: f64, p: &[f64]) -> (f64, [f64; 5]) {
    let [gamma0, amp, xi_half, tls, tpr] = [p[0], p[1], p[2], p[3], p[4]];
    let z = xi_half / t;
    let (s2, ds2_dz) = sech2_with_derivative(z);
    let t7 = t.powi(7);
    let value = gamma0 + amp * s2 + tls * t + tpr * t7;
    let d = [1.0, s2, amp * ds2_dz / t, t, t7];
    (value, d)
}

/// Γ_h at magnetic field `field_t` (tesla), with partials with respect to
/// (Γ₀, A, g_env). The Zeeman splitting is delegated to
/// [`zeeman_half_splitting`].
pub fn gamma_h_vs_b(field_t: f64, p: &LinewidthFieldParams) -> Result<(f64, [f64; 3])> {
    p.validate()?;
    let xi_half = zeeman_half_splitting(p.g_env, field_t)?;
    let z = xi_half / p.t_fixed_k;
    let (s2, ds2_dz) = sech2_with_derivative(z);
    let dz_dg = BOHR_MAGNETON_OVER_KB * field_t / (2.0 * p.t_fixed_k);
    let value = p.gamma0_khz + p.amp_khz * s2;
    Ok((value, [1.0, s2, p.amp_khz * ds2_dz * dz_dg]))
}

/// [`ModelFn`] for Γ_h(T); parameters
/// `[gamma0_khz, amp_khz, xi_half_k, alpha_tls, alpha_tpr]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TempLinewidth;

impl ModelFn for TempLinewidth {
    fn name(&self) -> &'static str {
        "gamma_h_vs_t"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["gamma0_khz", "amp_khz", "xi_half_k", "alpha_tls", "alpha_tpr"]
    }

    fn param_units(&self) -> &'static [&'static str] {
        &["kHz", "kHz", "K", "kHz/K", "kHz/K^7"]
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if !(x > 0.0) {
            return Err(Error::domain(format!("temperature must be > 0, got {x} K")));
        }
        Ok(())
    }

    fn value(&self, x: f64, p: &[f64]) -> f64 {
        eval_temp(x, p).0
    }

    fn value_and_partials(&self, x: f64, p: &[f64], dp: &mut [f64]) -> f64 {
        let (v, d) = eval_temp(x, p);
        dp.copy_from_slice(&d);
        v
    }

    fn default_bounds(&self) -> Vec<(f64, f64)> {
        vec![(0.0, f64::INFINITY); 5]
    }

    /// Γ₀ from the coldest point, α_TPR from the two hottest points, the
    /// sech² amplitude from the mid-range plateau, ξ_half from where the
    /// rise reaches sech²(1) ≈ 0.42 of it.
    fn guess(&self, data: &Dataset) -> Vec<f64> {
        let x = data.x();
        let y = data.y();
        let n = data.len();
        let gamma0 = y[0].max(0.0);
        let tpr = if n >= 2 {
            let (ta, tb) = (x[n - 2], x[n - 1]);
            let denom = tb.powi(7) - ta.powi(7);
            if denom > 0.0 {
                ((y[n - 1] - y[n - 2]) / denom).max(0.0)
            } else {
                0.0
            }
        } else {
            0.0
        };
        // Plateau estimate: median of the de-TPR'd middle third.
        let mut mid: Vec<f64> = (n / 3..2 * n / 3 + 1)
            .filter(|&i| i < n)
            .map(|i| y[i] - tpr * x[i].powi(7))
            .collect();
        mid.sort_by(f64::total_cmp);
        let plateau = mid.get(mid.len() / 2).copied().unwrap_or(gamma0);
        let amp = (plateau - gamma0).max(0.1 * gamma0.max(1e-3));
        let half_rise = gamma0 + 0.42 * amp;
        let xi_half = x
            .iter()
            .zip(y)
            .find(|(&t, &g)| g - tpr * t.powi(7) > half_rise)
            .map(|(&t, _)| t)
            .unwrap_or(x[n / 2]);
        vec![gamma0, amp, xi_half, 0.0, tpr]
    }
}

/// [`ModelFn`] for Γ_h(B) at fixed temperature; parameters
/// `[gamma0_khz, amp_khz, g_env]`.
#[derive(Debug, Clone, Copy)]
pub struct FieldLinewidth {
    t_fixed_k: f64,
}

impl FieldLinewidth {
    pub fn new(t_fixed_k: f64) -> Result<Self> {
        if !(t_fixed_k > 0.0) {
            return Err(Error::argument(format!(
                "fixed temperature must be > 0, got {t_fixed_k} K"
            )));
        }
        Ok(Self { t_fixed_k })
    }

    pub fn t_fixed_k(&self) -> f64 {
        self.t_fixed_k
    }

    fn eval(&self, b: f64, p: &[f64]) -> (f64, [f64; 3]) {
        let z = p[2] * BOHR_MAGNETON_OVER_KB * b / (2.0 * self.t_fixed_k);
        let (s2, ds2_dz) = sech2_with_derivative(z);
        let dz_dg = BOHR_MAGNETON_OVER_KB * b / (2.0 * self.t_fixed_k);
        (p[0] + p[1] * s2, [1.0, s2, p[1] * ds2_dz * dz_dg])
    }
}

impl ModelFn for FieldLinewidth {
    fn name(&self) -> &'static str {
        "gamma_h_vs_b"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["gamma0_khz", "amp_khz", "g_env"]
    }

    fn param_units(&self) -> &'static [&'static str] {
        &["kHz", "kHz", "1"]
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if x < 0.0 || !x.is_finite() {
            return Err(Error::domain(format!("field must be >= 0, got {x} T")));
        }
        Ok(())
    }

    fn value(&self, x: f64, p: &[f64]) -> f64 {
        self.eval(x, p).0
    }

    fn value_and_partials(&self, x: f64, p: &[f64], dp: &mut [f64]) -> f64 {
        let (v, d) = self.eval(x, p);
        dp.copy_from_slice(&d);
        v
    }

    fn default_bounds(&self) -> Vec<(f64, f64)> {
        vec![(0.0, f64::INFINITY), (0.0, f64::INFINITY), (0.0, f64::INFINITY)]
    }

    /// Γ₀ from the highest-field point, A from the zero-field excess.
    fn guess(&self, data: &Dataset) -> Vec<f64> {
        let y = data.y();
        let n = data.len();
        let gamma0 = y[n - 1].max(0.0);
        let amp = (y[0] - gamma0).max(0.1 * gamma0.max(1e-3));
        vec![gamma0, amp, 0.5]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn saturated_sech2_limit() {
        // Large T with only the sech² term: sech²(ξ/T) → 1, so Γ₀ + A.
        let p = LinewidthTempParams {
            gamma0_khz: 0.3,
            amp_khz: 1.2,
            xi_half_k: 0.47,
            alpha_tls: 0.0,
            alpha_tpr: 0.0,
        };
        let (v, _) = gamma_h_vs_t(1e9, &p).unwrap();
        assert_relative_eq!(v, 1.5, max_relative = 1e-12);
    }

    #[test]
    fn tls_term_alone() {
        let p = LinewidthTempParams {
            gamma0_khz: 0.0,
            amp_khz: 0.0,
            xi_half_k: 0.0,
            alpha_tls: 0.14,
            alpha_tpr: 0.0,
        };
        let (v, _) = gamma_h_vs_t(1.0, &p).unwrap();
        assert_relative_eq!(v, 0.14, max_relative = 1e-14);
    }

    #[test]
    fn sech2_at_unit_argument() {
        let p = LinewidthTempParams {
            gamma0_khz: 0.0,
            amp_khz: 1.0,
            xi_half_k: 0.47,
            alpha_tls: 0.0,
            alpha_tpr: 0.0,
        };
        let (v, _) = gamma_h_vs_t(0.47, &p).unwrap();
        assert_relative_eq!(v, 0.41997, max_relative = 1e-4);
    }

    #[test]
    fn temperature_domain() {
        let p = LinewidthTempParams {
            gamma0_khz: 0.1,
            amp_khz: 0.0,
            xi_half_k: 0.0,
            alpha_tls: 0.0,
            alpha_tpr: 0.0,
        };
        assert!(gamma_h_vs_t(0.0, &p).is_err());
        assert!(gamma_h_vs_t(-1.0, &p).is_err());
    }

    #[test]
    fn field_limits() {
        let p = LinewidthFieldParams {
            gamma0_khz: 0.2,
            amp_khz: 0.9,
            g_env: 0.84,
            t_fixed_k: 0.088,
        };
        let (at_zero, d) = gamma_h_vs_b(0.0, &p).unwrap();
        assert_relative_eq!(at_zero, 1.1, max_relative = 1e-12);
        assert_eq!(d[1], 1.0); // sech²(0) = 1
        let (at_large, _) = gamma_h_vs_b(1e6, &p).unwrap();
        assert_relative_eq!(at_large, 0.2, max_relative = 1e-12);
    }

    #[test]
    fn field_evaluation_at_three_tesla() {
        // g = 0.84, T = 88 mK: sech²(0.8464/0.088) = 1/cosh²(9.6177...).
        let p = LinewidthFieldParams {
            gamma0_khz: 0.0,
            amp_khz: 1.0,
            g_env: 0.84,
            t_fixed_k: 0.088,
        };
        let z: f64 = zeeman_half_splitting(0.84, 3.0).unwrap() / 0.088;
        let expected = 1.0 / (z.cosh() * z.cosh());
        let (v, _) = gamma_h_vs_b(3.0, &p).unwrap();
        assert_relative_eq!(v, expected, max_relative = 1e-12);
        assert_relative_eq!(v, 1.77e-8, max_relative = 0.02);
    }

    #[test]
    fn monotone_in_t_and_b() {
        let pt = LinewidthTempParams {
            gamma0_khz: 0.3,
            amp_khz: 1.2,
            xi_half_k: 0.47,
            alpha_tls: 0.05,
            alpha_tpr: 6e-5,
        };
        let mut last = 0.0;
        for i in 1..300 {
            let t = 0.04 * 1.02f64.powi(i);
            let (v, _) = gamma_h_vs_t(t, &pt).unwrap();
            assert!(v >= last, "gamma_h_vs_t not nondecreasing at T={t}");
            last = v;
        }
        let pb = LinewidthFieldParams {
            gamma0_khz: 0.2,
            amp_khz: 0.9,
            g_env: 0.43,
            t_fixed_k: 0.088,
        };
        let mut last = f64::INFINITY;
        for i in 0..300 {
            let b = i as f64 * 0.02;
            let (v, _) = gamma_h_vs_b(b, &pb).unwrap();
            assert!(v <= last, "gamma_h_vs_b not nonincreasing at B={b}");
            last = v;
        }
    }
}
