//! Closed-form model functions, each exposed as value plus analytic partial
//! derivatives with respect to its free parameters.
//!
//! Two layers:
//!
//! - typed operations ([`mims_decay`], [`gamma_h_vs_t`], [`gamma_h_vs_b`],
//!   [`lorentzian`], [`double_exp`], [`spin_t2_bound`],
//!   [`afc_efficiency_analytic`]) that take parameter structs and validate
//!   their domains;
//! - [`ModelFn`] implementations ([`Mims`], [`TempLinewidth`],
//!   [`FieldLinewidth`], [`LorentzianModel`], [`DoubleExpModel`]) that give
//!   the fitting engine a uniform vector-of-parameters view, default bounds,
//!   and data-driven initial guesses.

mod afc_efficiency;
mod echo_decay;
mod hole_decay;
mod linewidth;
mod lorentzian;

pub use afc_efficiency::{afc_efficiency_analytic, ToothShape};
pub use echo_decay::{mims_decay, Mims, MimsParams};
pub use hole_decay::{double_exp, spin_t2_bound, DoubleExpModel, DoubleExpParams};
pub use linewidth::{
    gamma_h_vs_b, gamma_h_vs_t, tls_eliminated, FieldLinewidth, LinewidthFieldParams,
    LinewidthTempParams, TempLinewidth, TLS_ELIMINATED_THRESHOLD,
};
pub use lorentzian::{lorentzian, LorentzianModel, LorentzianParams};

use crate::error::Result;
use crate::fitting::Dataset;

/// A scalar model y = f(x; p) with analytic partials, as seen by the
/// fitting engine.
///
/// Parameter order is fixed by [`param_names`](ModelFn::param_names); the
/// same order is used for bounds, freezing masks, and fit results.
pub trait ModelFn: Sync {
    fn name(&self) -> &'static str;
    fn param_names(&self) -> &'static [&'static str];
    /// Unit label per parameter ("1" for dimensionless, "arb" for raw
    /// amplitudes). Same order as `param_names`.
    fn param_units(&self) -> &'static [&'static str];

    fn n_params(&self) -> usize {
        self.param_names().len()
    }

    /// Validate an abscissa value against the model's domain.
    fn check_x(&self, _x: f64) -> Result<()> {
        Ok(())
    }

    /// Model value at `x`. Assumes `x` passed [`check_x`](ModelFn::check_x).
    fn value(&self, x: f64, p: &[f64]) -> f64;

    /// Model value and partials ∂f/∂pⱼ written into `dp`.
    ///
    /// The default implementation falls back to central differences for
    /// models without analytic partials; every model in this crate
    /// overrides it.
    fn value_and_partials(&self, x: f64, p: &[f64], dp: &mut [f64]) -> f64 {
        let mut hi = p.to_vec();
        let mut lo = p.to_vec();
        for j in 0..p.len() {
            let h = (1e-6 * p[j].abs()).max(1e-9);
            hi[j] = p[j] + h;
            lo[j] = p[j] - h;
            dp[j] = (self.value(x, &hi) - self.value(x, &lo)) / (hi[j] - lo[j]);
            hi[j] = p[j];
            lo[j] = p[j];
        }
        self.value(x, p)
    }

    fn has_analytic_partials(&self) -> bool {
        true
    }

    /// Box bounds per parameter, `(lo, hi)` inclusive.
    fn default_bounds(&self) -> Vec<(f64, f64)>;

    /// Data-driven initial guess so fits can run unattended from a file.
    fn guess(&self, data: &Dataset) -> Vec<f64>;

    /// Permutation bringing a fitted parameter vector into canonical order,
    /// when the model has an exchange symmetry. `None` means already
    /// canonical.
    fn canonical_permutation(&self, _params: &[f64]) -> Option<Vec<usize>> {
        None
    }
}

/// sech²(z) computed as (2/(eᶻ+e⁻ᶻ))² together with its derivative
/// d/dz sech²(z) = −2·sech²(z)·tanh(z). The argument is clamped at
/// |z| <= 350, beyond which both are exactly 0, so mK-temperature
/// arguments underflow gracefully instead of overflowing.
pub(crate) fn sech2_with_derivative(z: f64) -> (f64, f64) {
    if z.abs() > 350.0 {
        return (0.0, 0.0);
    }
    let ez = z.exp();
    let emz = (-z).exp();
    let s = 2.0 / (ez + emz);
    let s2 = s * s;
    let tanh = (ez - emz) / (ez + emz);
    (s2, -2.0 * s2 * tanh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sech2_matches_cosh() {
        for &z in &[0.0f64, 0.3, 1.0, 5.0, -2.5, 40.0] {
            let expected = 1.0 / (z.cosh() * z.cosh());
            let (got, _) = sech2_with_derivative(z);
            assert!((got - expected).abs() <= 1e-15 * expected.max(1e-300));
        }
    }

    #[test]
    fn sech2_clamps_to_zero() {
        assert_eq!(sech2_with_derivative(351.0), (0.0, 0.0));
        assert_eq!(sech2_with_derivative(-400.0), (0.0, 0.0));
        assert_eq!(sech2_with_derivative(1000.0), (0.0, 0.0));
    }

    #[test]
    fn sech2_derivative_sign() {
        let (_, d) = sech2_with_derivative(1.0);
        assert!(d < 0.0);
        let (_, d) = sech2_with_derivative(-1.0);
        assert!(d > 0.0);
        let (_, d) = sech2_with_derivative(0.0);
        assert_eq!(d, 0.0);
    }
}
