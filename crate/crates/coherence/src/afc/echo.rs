//! Pulse construction, propagation through a transfer function, and echo
//! detection.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::grid::FreqGrid;
use super::transfer::TransferFunction;
use crate::error::{Error, Result};

/// Uniformly sampled complex field envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseWaveform {
    dt_us: f64,
    t0_us: f64,
    samples: Vec<Complex64>,
}

impl PulseWaveform {
    pub fn new(dt_us: f64, t0_us: f64, samples: Vec<Complex64>) -> Result<Self> {
        if !(dt_us > 0.0) {
            return Err(Error::argument(format!("time step must be > 0, got {dt_us} us")));
        }
        if samples.is_empty() {
            return Err(Error::argument("empty waveform".to_string()));
        }
        let energy: f64 = samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * dt_us;
        if !energy.is_finite() || energy <= 0.0 {
            return Err(Error::argument(format!(
                "waveform energy must be finite and > 0, got {energy}"
            )));
        }
        Ok(PulseWaveform { dt_us, t0_us, samples })
    }

    pub fn dt_us(&self) -> f64 {
        self.dt_us
    }

    pub fn t0_us(&self) -> f64 {
        self.t0_us
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn time_at(&self, i: usize) -> f64 {
        self.t0_us + i as f64 * self.dt_us
    }

    pub fn end_time_us(&self) -> f64 {
        self.time_at(self.samples.len() - 1)
    }

    /// Total energy Σ|s|²·dt.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.dt_us
    }

    /// Energy-weighted centroid time of |s|².
    pub fn intensity_centroid_us(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, s) in self.samples.iter().enumerate() {
            let p = s.norm_sqr();
            num += self.time_at(i) * p;
            den += p;
        }
        num / den
    }

    /// Full width at half maximum of |s|², from the outermost half-max
    /// crossings. `None` if the peak never drops below half on both sides.
    pub fn intensity_fwhm_us(&self) -> Option<f64> {
        let power: Vec<f64> = self.samples.iter().map(|s| s.norm_sqr()).collect();
        let (i_max, &p_max) = power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))?;
        let half = p_max / 2.0;
        let left = (0..i_max).rev().find(|&i| power[i] < half)?;
        let right = (i_max..power.len()).find(|&i| power[i] < half)?;
        Some((right - left) as f64 * self.dt_us)
    }
}

/// Gaussian input pulse with the given intensity FWHM, centered at
/// `center_us`, sampled on `grid` starting at `t0_us`.
pub fn gaussian_pulse(grid: &FreqGrid, center_us: f64, fwhm_us: f64, t0_us: f64) -> Result<PulseWaveform> {
    if !(fwhm_us > 0.0) {
        return Err(Error::argument(format!("pulse FWHM must be > 0, got {fwhm_us} us")));
    }
    let dt = grid.dt_us();
    let ln2_4 = 4.0 * std::f64::consts::LN_2;
    let samples: Vec<Complex64> = (0..grid.n())
        .map(|i| {
            let t = t0_us + i as f64 * dt - center_us;
            // field envelope: |E|² has the requested FWHM
            Complex64::new((-0.5 * ln2_4 * t * t / (fwhm_us * fwhm_us)).exp(), 0.0)
        })
        .collect();
    PulseWaveform::new(dt, t0_us, samples)
}

/// Propagate a pulse through H: output spectrum = input spectrum × H.
///
/// The pulse bandwidth (1/duration scale) must fit inside a quarter of the
/// grid's frequency span.
pub fn propagate(pulse: &PulseWaveform, transfer: &TransferFunction) -> Result<PulseWaveform> {
    let n = pulse.len();
    if transfer.len() != n {
        return Err(Error::argument(format!(
            "transfer function length {} does not match waveform length {n}",
            transfer.len()
        )));
    }
    let span = 1.0 / pulse.dt_us();
    let duration_scale = pulse
        .intensity_fwhm_us()
        .unwrap_or(4.0 * pulse.dt_us());
    let bandwidth = 1.0 / duration_scale;
    if bandwidth > span / 4.0 * (1.0 + 1e-9) {
        return Err(Error::argument(format!(
            "pulse bandwidth ~{bandwidth:.3} MHz exceeds a quarter of the grid span ({:.3} MHz)",
            span / 4.0
        )));
    }

    let mut buf = pulse.samples().to_vec();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (v, h) in buf.iter_mut().zip(transfer.h_wrapped()) {
        *v *= h;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let norm = 1.0 / n as f64;
    for v in &mut buf {
        *v *= norm;
    }
    PulseWaveform::new(pulse.dt_us(), pulse.t0_us(), buf)
}

/// Echo timing and recall efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EchoReport {
    /// Energy-weighted centroid of the echo window, µs.
    pub arrival_us: f64,
    /// Window energy divided by input-pulse energy.
    pub efficiency: f64,
    /// Integration window (t_lo, t_hi), µs.
    pub window_us: (f64, f64),
}

/// Locate and integrate the first-order echo around `expected_ts_us`.
///
/// The window is [0.6, 1.4]·t_s, clipped away from the transmitted pulse
/// (taken to end 3 intensity-FWHM after the input centroid); this excludes
/// both the transmitted pulse and the 2/Δ second-order echo. An error is
/// returned if the clipped window vanishes or extends past the waveform.
pub fn detect_echo(
    output: &PulseWaveform,
    input: &PulseWaveform,
    expected_ts_us: f64,
) -> Result<EchoReport> {
    if !(expected_ts_us > 0.0) {
        return Err(Error::argument(format!(
            "expected storage time must be > 0, got {expected_ts_us} us"
        )));
    }
    let input_center = input.intensity_centroid_us();
    let input_fwhm = input.intensity_fwhm_us().unwrap_or(4.0 * input.dt_us());
    let pulse_end = input_center + 3.0 * input_fwhm;

    let t_lo = (0.6 * expected_ts_us).max(pulse_end);
    let t_hi = 1.4 * expected_ts_us;
    if t_hi > output.end_time_us() {
        return Err(Error::argument(format!(
            "echo window extends to {t_hi:.3} us, beyond the waveform end {:.3} us",
            output.end_time_us()
        )));
    }
    if t_lo >= t_hi {
        return Err(Error::argument(format!(
            "echo window collides with the transmitted pulse (pulse ends at \
             {pulse_end:.3} us, window closes at {t_hi:.3} us)"
        )));
    }

    let dt = output.dt_us();
    let mut energy = 0.0;
    let mut weighted_t = 0.0;
    for (i, s) in output.samples().iter().enumerate() {
        let t = output.time_at(i);
        if t >= t_lo && t <= t_hi {
            let p = s.norm_sqr() * dt;
            energy += p;
            weighted_t += t * p;
        }
    }
    let arrival = if energy > 0.0 {
        weighted_t / energy
    } else {
        0.5 * (t_lo + t_hi)
    };
    Ok(EchoReport {
        arrival_us: arrival,
        efficiency: energy / input.energy(),
        window_us: (t_lo, t_hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::afc::profile::AbsorptionProfile;
    use crate::afc::transfer::transfer_function;
    use approx::assert_relative_eq;

    fn test_grid() -> FreqGrid {
        FreqGrid::new(1 << 12, 32.0).unwrap()
    }

    #[test]
    fn gaussian_pulse_has_requested_width() {
        let grid = test_grid();
        let p = gaussian_pulse(&grid, 0.0, 2.0, -grid.duration_us() / 8.0).unwrap();
        let fwhm = p.intensity_fwhm_us().unwrap();
        assert!((fwhm - 2.0).abs() <= 2.0 * grid.dt_us(), "fwhm {fwhm}");
        assert!(p.intensity_centroid_us().abs() < grid.dt_us());
    }

    #[test]
    fn identity_transfer_is_lossless() {
        let grid = test_grid();
        let profile = AbsorptionProfile::from_fn(grid, |_| 0.0).unwrap();
        let tf = transfer_function(&profile);
        let input = gaussian_pulse(&grid, 0.0, 1.0, -grid.duration_us() / 8.0).unwrap();
        let out = propagate(&input, &tf).unwrap();
        let diff: f64 = input
            .samples()
            .iter()
            .zip(out.samples())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * input.dt_us();
        assert!(diff / input.energy() < 1e-10);
    }

    #[test]
    fn flat_absorber_obeys_beer_lambert() {
        let grid = test_grid();
        let d = 1.7;
        let profile = AbsorptionProfile::from_fn(grid, |_| d).unwrap();
        let tf = transfer_function(&profile);
        let input = gaussian_pulse(&grid, 0.0, 1.0, -grid.duration_us() / 8.0).unwrap();
        let out = propagate(&input, &tf).unwrap();
        assert_relative_eq!(out.energy(), input.energy() * (-d).exp(), max_relative = 1e-9);
    }

    #[test]
    fn bandwidth_violation_is_rejected() {
        let grid = test_grid(); // dt = 1/32 µs
        // FWHM comparable to dt: bandwidth far exceeds span/4
        let input = gaussian_pulse(&grid, 0.0, 0.04, -grid.duration_us() / 8.0).unwrap();
        let profile = AbsorptionProfile::from_fn(grid, |_| 0.0).unwrap();
        let tf = transfer_function(&profile);
        assert!(propagate(&input, &tf).is_err());
    }

    #[test]
    fn window_collision_detected() {
        let grid = test_grid();
        let input = gaussian_pulse(&grid, 0.0, 1.0, -grid.duration_us() / 8.0).unwrap();
        // expected_ts so small that 1.4·ts < pulse end
        assert!(detect_echo(&input, &input, 0.5).is_err());
    }

    #[test]
    fn window_beyond_waveform_detected() {
        let grid = test_grid();
        let input = gaussian_pulse(&grid, 0.0, 1.0, -grid.duration_us() / 8.0).unwrap();
        let too_late = grid.duration_us();
        assert!(detect_echo(&input, &input, too_late).is_err());
    }
}
