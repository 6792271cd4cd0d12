//! Canonical units, physical constants, and the conversions shared by all
//! modules.
//!
//! Every module boundary exchanges values in these units:
//!
//! | quantity          | unit |
//! |-------------------|------|
//! | temperature       | K    |
//! | magnetic field    | T    |
//! | time              | µs   |
//! | linewidth         | kHz  |
//! | optical frequency | GHz  |
//! | wavelength        | nm   |
//!
//! Unit conversion happens only at I/O edges. The choice keeps every fitted
//! magnitude within roughly [1e-4, 1e4], which conditions the optimizer.
//! Constants are hard-coded and never user-configurable.

use crate::error::{Error, Result};

/// Bohr magneton over Boltzmann constant, µ_B/k_B, in K/T (CODATA, rounded).
pub const BOHR_MAGNETON_OVER_KB: f64 = 0.6717138;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Homogeneous linewidth from optical coherence time: Γ_h = 1/(π T₂).
///
/// Input in µs, output in kHz, so Γ_h[kHz] = 10³/(π·T₂[µs]).
pub fn t2_to_gamma_h(t2_us: f64) -> Result<f64> {
    if !(t2_us > 0.0) {
        return Err(Error::domain(format!(
            "coherence time must be positive, got {t2_us} us"
        )));
    }
    Ok(1e3 / (std::f64::consts::PI * t2_us))
}

/// Optical coherence time from homogeneous linewidth (inverse of
/// [`t2_to_gamma_h`]; the map is an involution up to the unit factor).
pub fn gamma_h_to_t2(gamma_khz: f64) -> Result<f64> {
    if !(gamma_khz > 0.0) {
        return Err(Error::domain(format!(
            "linewidth must be positive, got {gamma_khz} kHz"
        )));
    }
    Ok(1e3 / (std::f64::consts::PI * gamma_khz))
}

/// Vacuum wavelength (nm) to optical frequency (GHz).
pub fn wavelength_to_frequency(lambda_nm: f64) -> Result<f64> {
    if !(lambda_nm > 0.0) {
        return Err(Error::domain(format!(
            "wavelength must be positive, got {lambda_nm} nm"
        )));
    }
    // c[m/s] / λ[nm] is numerically equal to the frequency in GHz.
    Ok(SPEED_OF_LIGHT / lambda_nm)
}

/// Half Zeeman splitting ξ/2k_B = g_env·(µ_B/k_B)·B/2 of an environmental
/// magnetic center, in kelvin.
pub fn zeeman_half_splitting(g_env: f64, field_t: f64) -> Result<f64> {
    if g_env < 0.0 || !g_env.is_finite() {
        return Err(Error::domain(format!(
            "g-factor must be non-negative, got {g_env}"
        )));
    }
    if field_t < 0.0 || !field_t.is_finite() {
        return Err(Error::domain(format!(
            "magnetic field must be non-negative, got {field_t} T"
        )));
    }
    Ok(g_env * BOHR_MAGNETON_OVER_KB * field_t / 2.0)
}
