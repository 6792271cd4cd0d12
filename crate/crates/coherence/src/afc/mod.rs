//! Linear-response simulation of atomic-frequency-comb storage.
//!
//! Pipeline: [`build_comb`] samples the prepared optical-depth structure,
//! [`transfer_function`] derives the causal complex response H(ω) through a
//! discrete Kramers-Kronig pair, [`propagate`] filters the input pulse in
//! the frequency domain, and [`detect_echo`] integrates the first-order
//! echo that re-emerges at t_s = 1/Δ.
//!
//! Only forward recall of a two-level medium is simulated: no control
//! pulses, spin-wave transfer, cavity enhancement, or backward retrieval.

mod echo;
mod grid;
mod profile;
mod transfer;

pub use echo::{detect_echo, gaussian_pulse, propagate, EchoReport, PulseWaveform};
pub use grid::FreqGrid;
pub use profile::AbsorptionProfile;
pub use transfer::{transfer_function, TransferFunction};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{afc_efficiency_analytic, ToothShape};
use crate::par;

/// Geometry of a prepared comb.
///
/// `d_peak` is the total optical depth at a tooth center; the tooth
/// contrast above the background is `d_peak − d0`. Tooth FWHM is
/// γ = Δ/finesse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombSpec {
    /// Total prepared bandwidth, MHz.
    pub span_mhz: f64,
    /// Tooth spacing Δ, MHz.
    pub delta_mhz: f64,
    /// Finesse F = Δ/γ, >= 1.
    pub finesse: f64,
    /// Optical depth at tooth centers.
    pub d_peak: f64,
    /// Background optical depth between teeth and outside the span.
    pub d0: f64,
    pub tooth_shape: ToothShape,
}

impl CombSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_mhz > 0.0) {
            return Err(Error::argument(format!(
                "tooth spacing must be > 0, got {} MHz",
                self.delta_mhz
            )));
        }
        if !(self.span_mhz >= 2.0 * self.delta_mhz) {
            return Err(Error::argument(format!(
                "span {} MHz must cover at least two tooth spacings ({} MHz)",
                self.span_mhz,
                2.0 * self.delta_mhz
            )));
        }
        if !(self.finesse >= 1.0) {
            return Err(Error::argument(format!("finesse must be >= 1, got {}", self.finesse)));
        }
        if !(self.d0 >= 0.0) || !(self.d_peak >= self.d0) {
            return Err(Error::argument(format!(
                "need d_peak >= d0 >= 0, got d_peak={}, d0={}",
                self.d_peak, self.d0
            )));
        }
        Ok(())
    }

    /// Number of comb periods within the span.
    pub fn n_teeth(&self) -> usize {
        (self.span_mhz / self.delta_mhz).floor() as usize
    }

    /// Tooth FWHM γ = Δ/F, MHz.
    pub fn tooth_fwhm_mhz(&self) -> f64 {
        self.delta_mhz / self.finesse
    }

    /// Expected echo delay t_s = 1/Δ, µs.
    pub fn storage_time_us(&self) -> f64 {
        1.0 / self.delta_mhz
    }
}

/// AFC storage time from the tooth spacing: t_s = 1/Δ.
pub fn storage_time(delta_mhz: f64) -> Result<f64> {
    if !(delta_mhz > 0.0) {
        return Err(Error::domain(format!(
            "tooth spacing must be > 0, got {delta_mhz} MHz"
        )));
    }
    Ok(1.0 / delta_mhz)
}

/// Sample the comb's optical depth on a grid.
///
/// Square teeth occupy |f − kΔ| <= γ/2; Gaussian teeth have FWHM γ. Outside
/// the span the depth is the background d0. The grid must resolve each
/// tooth with at least 10 samples (df <= γ/10).
pub fn build_comb(spec: &CombSpec, grid: &FreqGrid) -> Result<AbsorptionProfile> {
    spec.validate()?;
    let gamma = spec.tooth_fwhm_mhz();
    let df = grid.df_mhz();
    if df > gamma / 10.0 {
        let needed = (10.0 * grid.span_mhz() / gamma).ceil() as usize;
        return Err(Error::argument(format!(
            "grid resolution {df:.6} MHz is coarser than one tenth of the tooth \
             width ({:.6} MHz); use at least {needed} points over this span",
            gamma / 10.0
        )));
    }
    let half_span = spec.span_mhz / 2.0;
    let contrast = spec.d_peak - spec.d0;
    let ln2_4 = 4.0 * std::f64::consts::LN_2;
    let profile_fn = |f: f64| -> f64 {
        if f.abs() > half_span {
            return spec.d0;
        }
        let k = (f / spec.delta_mhz).round();
        match spec.tooth_shape {
            ToothShape::Square => {
                if (f - k * spec.delta_mhz).abs() <= gamma / 2.0 {
                    spec.d_peak
                } else {
                    spec.d0
                }
            }
            ToothShape::Gaussian => {
                let mut amp = 0.0;
                for dk in [-1.0, 0.0, 1.0] {
                    let df_tooth = f - (k + dk) * spec.delta_mhz;
                    amp += (-ln2_4 * df_tooth * df_tooth / (gamma * gamma)).exp();
                }
                spec.d0 + contrast * amp.min(1.0)
            }
        }
    };
    AbsorptionProfile::from_fn(*grid, profile_fn)
}

/// Numerical controls for a storage run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Grid size; power of two.
    pub grid_points: usize,
    /// Input-pulse intensity FWHM as a fraction of the storage time
    /// (bandwidth then covers several teeth).
    pub pulse_fwhm_factor: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { grid_points: 1 << 20, pulse_fwhm_factor: 0.15 }
    }
}

/// Everything produced by one storage simulation.
#[derive(Debug, Clone)]
pub struct StorageRun {
    pub spec: CombSpec,
    pub grid: FreqGrid,
    pub profile: AbsorptionProfile,
    pub transfer: TransferFunction,
    pub input: PulseWaveform,
    pub output: PulseWaveform,
    pub echo: EchoReport,
}

/// Run the full storage pipeline for one comb.
///
/// The grid spans max(4× pulse bandwidth, 1.5× comb span) so both the
/// pulse spectrum and the comb structure fit with margin; the input pulse
/// is a Gaussian centered at t = 0, an eighth of the record after its
/// start, leaving the rest for echoes.
pub fn simulate_storage(spec: &CombSpec, cfg: &SimConfig) -> Result<StorageRun> {
    spec.validate()?;
    let ts = spec.storage_time_us();
    let pulse_fwhm = cfg.pulse_fwhm_factor * ts;
    if !(pulse_fwhm > 0.0) {
        return Err(Error::argument("pulse FWHM factor must be > 0".to_string()));
    }
    let bandwidth = 1.0 / pulse_fwhm;
    let grid_span = (4.0 * bandwidth).max(1.5 * spec.span_mhz);
    let grid = FreqGrid::new(cfg.grid_points, grid_span)?;
    if grid.duration_us() < 4.0 * ts {
        return Err(Error::argument(format!(
            "record of {:.1} us is shorter than 4 storage times ({:.1} us); \
             increase grid_points",
            grid.duration_us(),
            4.0 * ts
        )));
    }
    let profile = build_comb(spec, &grid)?;
    let transfer = transfer_function(&profile);
    let input = gaussian_pulse(&grid, 0.0, pulse_fwhm, -grid.duration_us() / 8.0)?;
    let output = propagate(&input, &transfer)?;
    let echo = detect_echo(&output, &input, ts)?;
    Ok(StorageRun { spec: *spec, grid, profile, transfer, input, output, echo })
}

/// One point of an efficiency sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyPoint {
    /// Tooth depth above background.
    pub d: f64,
    pub eta_numeric: f64,
    pub eta_analytic: f64,
}

/// Simulated vs closed-form recall efficiency over a list of tooth depths,
/// at fixed finesse, background, and shape taken from `template`
/// (`template.d_peak` is ignored). Runs fan out over the parallel map; the
/// result order follows `d_list` regardless of scheduling.
pub fn efficiency_curve(
    template: &CombSpec,
    d_list: &[f64],
    cfg: &SimConfig,
) -> Result<Vec<EfficiencyPoint>> {
    par::map_collect(d_list, |&d| -> Result<EfficiencyPoint> {
        if d < 0.0 {
            return Err(Error::domain(format!("tooth depth must be >= 0, got {d}")));
        }
        let spec = CombSpec { d_peak: template.d0 + d, ..*template };
        let eta_analytic = afc_efficiency_analytic(d, spec.finesse, spec.d0, spec.tooth_shape)?;
        let eta_numeric = if d == 0.0 {
            // no contrast, no echo
            0.0
        } else {
            simulate_storage(&spec, cfg)?.echo.efficiency
        };
        Ok(EfficiencyPoint { d, eta_numeric, eta_analytic })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square_spec(span: f64, delta: f64, finesse: f64, d_peak: f64, d0: f64) -> CombSpec {
        CombSpec {
            span_mhz: span,
            delta_mhz: delta,
            finesse,
            d_peak,
            d0,
            tooth_shape: ToothShape::Square,
        }
    }

    #[test]
    fn tooth_count_matches_span() {
        assert_eq!(square_spec(12.0, 0.2, 4.0, 1.0, 0.0).n_teeth(), 60);
        assert_eq!(square_spec(12.0, 2.0, 2.0, 1.0, 0.0).n_teeth(), 6);
    }

    #[test]
    fn storage_time_values() {
        assert_relative_eq!(storage_time(0.2).unwrap(), 5.0, max_relative = 1e-14);
        assert_relative_eq!(storage_time(2.0).unwrap(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(storage_time(1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert!(storage_time(0.0).is_err());
        assert!(storage_time(-1.0).is_err());
    }

    #[test]
    fn finesse_two_duty_cycle_is_half() {
        let spec = square_spec(12.0, 0.2, 2.0, 1.4, 0.2);
        let grid = FreqGrid::new(1 << 16, 18.0).unwrap();
        let profile = build_comb(&spec, &grid).unwrap();
        let mean = profile.mean_depth_within(spec.span_mhz / 2.0);
        let expected = spec.d0 + (spec.d_peak - spec.d0) / 2.0;
        // duty quantization: one grid cell per tooth edge
        let tol = (spec.d_peak - spec.d0)
            * (2.0 * (spec.n_teeth() as f64 + 1.0) * grid.df_mhz() / spec.span_mhz);
        assert!((mean - expected).abs() <= tol, "mean {mean} vs {expected} (tol {tol})");
    }

    #[test]
    fn zero_contrast_profile_is_flat() {
        let spec = square_spec(12.0, 1.0, 4.0, 0.7, 0.7);
        let grid = FreqGrid::new(1 << 12, 18.0).unwrap();
        let profile = build_comb(&spec, &grid).unwrap();
        assert!(profile.alpha_l().iter().all(|&a| a == 0.7));
    }

    #[test]
    fn coarse_grid_rejected_with_required_density() {
        let spec = square_spec(12.0, 0.2, 6.0, 1.0, 0.0);
        let grid = FreqGrid::new(1 << 8, 18.0).unwrap(); // df = 0.07 > γ/10
        let err = build_comb(&spec, &grid).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("at least"), "message should name the density: {msg}");
    }

    #[test]
    fn gaussian_teeth_peak_at_centers() {
        let spec = CombSpec { tooth_shape: ToothShape::Gaussian, ..square_spec(12.0, 1.0, 4.0, 2.0, 0.3) };
        let grid = FreqGrid::new(1 << 14, 18.0).unwrap();
        let profile = build_comb(&spec, &grid).unwrap();
        // At f = 0 (a tooth center) depth reaches d_peak.
        let center = profile.alpha_l()[grid.n() / 2];
        assert!((center - 2.0).abs() < 1e-6, "center depth {center}");
        // Midway between teeth it falls close to the background.
        let idx_mid = grid.n() / 2 + (0.5 / grid.df_mhz()).round() as usize;
        let mid = profile.alpha_l()[idx_mid];
        assert!(mid < 0.3 + 0.1 * (2.0 - 0.3), "midpoint depth {mid}");
    }

    #[test]
    fn echo_arrives_at_inverse_tooth_spacing() {
        let cfg = SimConfig { grid_points: 1 << 15, ..Default::default() };
        let spec = square_spec(12.0, 1.0, 4.0, 1.0, 0.0);
        let run = simulate_storage(&spec, &cfg).unwrap();
        assert!(
            (run.echo.arrival_us - 1.0).abs() <= run.grid.dt_us(),
            "arrival {} us (dt {})",
            run.echo.arrival_us,
            run.grid.dt_us()
        );
        assert!(run.echo.efficiency > 0.01);
    }

    #[test]
    fn flat_profile_gives_no_echo() {
        let cfg = SimConfig { grid_points: 1 << 14, ..Default::default() };
        let spec = square_spec(12.0, 1.0, 1.0, 0.8, 0.8);
        let run = simulate_storage(&spec, &cfg).unwrap();
        assert!(run.echo.efficiency < 1e-6, "efficiency {}", run.echo.efficiency);
    }

    #[test]
    fn output_never_exceeds_input_energy() {
        let cfg = SimConfig { grid_points: 1 << 14, ..Default::default() };
        for d0 in [0.0, 0.5] {
            let spec = square_spec(12.0, 1.0, 3.0, 1.5 + d0, d0);
            let run = simulate_storage(&spec, &cfg).unwrap();
            assert!(run.output.energy() <= run.input.energy());
        }
    }

    #[test]
    fn numeric_efficiency_tracks_analytic_at_reference_point() {
        let cfg = SimConfig { grid_points: 1 << 16, ..Default::default() };
        let template = square_spec(12.0, 1.0, 4.0, 1.0, 0.0);
        let points = efficiency_curve(&template, &[1.0], &cfg).unwrap();
        let p = &points[0];
        assert!((p.eta_analytic - 0.03946).abs() < 5e-5);
        assert!(
            (p.eta_numeric - p.eta_analytic).abs() / p.eta_analytic < 0.15,
            "numeric {} vs analytic {}",
            p.eta_numeric,
            p.eta_analytic
        );
    }

    #[test]
    fn background_rescales_both_efficiencies() {
        let cfg = SimConfig { grid_points: 1 << 15, ..Default::default() };
        let clear = square_spec(12.0, 1.0, 4.0, 1.0, 0.0);
        let shaded = square_spec(12.0, 1.0, 4.0, 2.0, 1.0); // same contrast, d0 = 1
        let run_clear = simulate_storage(&clear, &cfg).unwrap();
        let run_shaded = simulate_storage(&shaded, &cfg).unwrap();
        let ratio = run_shaded.echo.efficiency / run_clear.echo.efficiency;
        assert!(
            (ratio - (-1.0f64).exp()).abs() / (-1.0f64).exp() < 0.05,
            "ratio {ratio}"
        );
    }

    #[test]
    fn grid_convergence_within_two_percent() {
        let spec = square_spec(12.0, 1.0, 4.0, 1.0, 0.0);
        let eta_lo = simulate_storage(&spec, &SimConfig { grid_points: 1 << 15, ..Default::default() })
            .unwrap()
            .echo
            .efficiency;
        let eta_hi = simulate_storage(&spec, &SimConfig { grid_points: 1 << 16, ..Default::default() })
            .unwrap()
            .echo
            .efficiency;
        assert!(
            (eta_hi - eta_lo).abs() / eta_hi < 0.02,
            "eta {} vs {} on doubled grid",
            eta_lo,
            eta_hi
        );
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(square_spec(0.3, 0.2, 2.0, 1.0, 0.0).validate().is_err()); // span < 2Δ
        assert!(square_spec(12.0, 1.0, 0.5, 1.0, 0.0).validate().is_err()); // F < 1
        assert!(square_spec(12.0, 1.0, 2.0, 0.5, 1.0).validate().is_err()); // d_peak < d0
        assert!(square_spec(12.0, -1.0, 2.0, 1.0, 0.0).validate().is_err());
    }
}
