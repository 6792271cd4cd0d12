//! Built-in verification suite.
//!
//! Shared by the CLI `selftest` subcommand and the acceptance tests: unit
//! anchors against published values, analytic partials against the
//! central-difference oracle, monotonicity sweeps over random parameter
//! draws, and the physical invariants of the storage simulation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::afc::{simulate_storage, CombSpec, SimConfig};
use crate::fitting::{finite_diff_jacobian, Dataset};
use crate::models::{
    DoubleExpModel, FieldLinewidth, LorentzianModel, Mims, ModelFn, TempLinewidth, ToothShape,
};
use crate::quantities;

/// Result of one named check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckOutcome { name: name.to_string(), passed, detail }
    }
}

/// Point checks against published anchor values.
pub fn unit_anchors() -> Vec<CheckOutcome> {
    let mut out = Vec::new();

    let g = quantities::t2_to_gamma_h(421.5).unwrap();
    let rel = (g - 0.7551).abs() / 0.7551;
    out.push(CheckOutcome::new(
        "unit_anchor_t2_421.5us",
        rel < 1e-3,
        format!("1/(pi*421.5us) = {g:.6} kHz (expect 0.7551 within 0.1%)"),
    ));

    let f = quantities::wavelength_to_frequency(580.8862).unwrap();
    out.push(CheckOutcome::new(
        "unit_anchor_lambda_580.8862nm",
        (f - 516095.0).abs() <= 1.0,
        format!("c/lambda = {f:.1} GHz (expect 516095 +- 1)"),
    ));

    let xi = quantities::zeeman_half_splitting(0.84, 3.0).unwrap();
    out.push(CheckOutcome::new(
        "unit_anchor_zeeman_g0.84_3T",
        (xi - 0.846).abs() < 5e-4 && (xi - 0.85).abs() < 5e-3,
        format!("xi/2kB = {xi:.4} K (expect 0.846, rounding to 0.85)"),
    ));

    out
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

/// Largest relative deviation between analytic partials and the
/// central-difference oracle at one point.
fn partials_deviation(model: &dyn ModelFn, params: &[f64], x: f64) -> f64 {
    let data = Dataset::new(vec![x], vec![0.0], None).unwrap();
    let numeric = finite_diff_jacobian(model, params, &data);
    let mut analytic = vec![0.0; params.len()];
    model.value_and_partials(x, params, &mut analytic);
    analytic
        .iter()
        .zip(&numeric[0])
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Analytic partials vs central differences at `points` random points per
/// model. Parameter draws stay inside the regime where every partial is
/// observable above finite-difference round-off, so the 1e-6 bar is
/// meaningful for each entry of the gradient.
pub fn gradient_suite(points: usize, seed: u64) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let tol = 1e-6;

    // Echo decay: keep 2tau/T2 away from 1 so the stretch partial stays
    // finite (it vanishes at u = 1 where ln u = 0).
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let amp = uniform(&mut rng, 0.5, 2.0);
        let t2 = uniform(&mut rng, 50.0, 500.0);
        let stretch = uniform(&mut rng, 0.7, 2.5);
        let u = if rng.gen::<bool>() {
            uniform(&mut rng, 0.25, 0.8)
        } else {
            uniform(&mut rng, 1.25, 2.2)
        };
        let tau = u * t2 / 2.0;
        worst = worst.max(partials_deviation(&Mims, &[amp, t2, stretch], tau));
    }
    out.push(CheckOutcome::new(
        "gradient_mims_decay",
        worst < tol,
        format!("max relative deviation {worst:.2e} over {points} points"),
    ));

    // Temperature model: T >= 1.05 keeps the T^7 partial above the
    // round-off floor of the difference quotient.
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut worst = 0.0f64;
    for _ in 0..points {
        let p = [
            uniform(&mut rng, 0.1, 1.0),
            uniform(&mut rng, 0.5, 2.0),
            uniform(&mut rng, 0.3, 0.9),
            uniform(&mut rng, 0.05, 0.3),
            uniform(&mut rng, 3e-5, 1e-4),
        ];
        let t = uniform(&mut rng, 1.05, 4.0);
        worst = worst.max(partials_deviation(&TempLinewidth, &p, t));
    }
    out.push(CheckOutcome::new(
        "gradient_gamma_h_vs_t",
        worst < tol,
        format!("max relative deviation {worst:.2e} over {points} points"),
    ));

    // Field model at fixed temperature, Zeeman argument up to ~3.
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let mut worst = 0.0f64;
    for _ in 0..points {
        let t_fixed = uniform(&mut rng, 0.05, 0.3);
        let model = FieldLinewidth::new(t_fixed).unwrap();
        let p = [
            uniform(&mut rng, 0.05, 0.5),
            uniform(&mut rng, 0.5, 2.0),
            uniform(&mut rng, 0.2, 1.0),
        ];
        let z = uniform(&mut rng, 0.1, 3.0);
        let b = z * 2.0 * t_fixed / (p[2] * quantities::BOHR_MAGNETON_OVER_KB);
        worst = worst.max(partials_deviation(&model, &p, b));
    }
    out.push(CheckOutcome::new(
        "gradient_gamma_h_vs_b",
        worst < tol,
        format!("max relative deviation {worst:.2e} over {points} points"),
    ));

    // Lorentzian in detuned coordinates; detuning away from the center
    // where the center partial vanishes.
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
    let mut worst = 0.0f64;
    for _ in 0..points {
        let center = uniform(&mut rng, 2.0, 6.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let fwhm = uniform(&mut rng, 2.0, 11.0);
        let p = [center, fwhm, uniform(&mut rng, 0.5, 2.0), uniform(&mut rng, 0.1, 1.0)];
        let detuning = uniform(&mut rng, 0.3, 1.5)
            * fwhm
            * if rng.gen::<bool>() { 1.0 } else { -1.0 };
        worst = worst.max(partials_deviation(&LorentzianModel, &p, center + detuning));
    }
    out.push(CheckOutcome::new(
        "gradient_lorentzian",
        worst < tol,
        format!("max relative deviation {worst:.2e} over {points} points"),
    ));

    // Double exponential with separated lifetimes; delays chosen so both
    // components contribute observably.
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(4));
    let mut worst = 0.0f64;
    for _ in 0..points {
        let tau1 = uniform(&mut rng, 1.0, 6.0);
        let tau2 = tau1 * uniform(&mut rng, 3.0, 12.0);
        let p = [uniform(&mut rng, 0.3, 1.5), tau1, uniform(&mut rng, 0.3, 1.5), tau2];
        let t = uniform(&mut rng, (0.3 * tau1).max(0.1 * tau2), 5.0 * tau1);
        worst = worst.max(partials_deviation(&DoubleExpModel, &p, t));
    }
    out.push(CheckOutcome::new(
        "gradient_double_exp",
        worst < tol,
        format!("max relative deviation {worst:.2e} over {points} points"),
    ));

    out
}

/// Monotonicity of the linewidth models over random non-negative parameter
/// draws: Γ_h(T) nondecreasing in T, Γ_h(B) nonincreasing in B.
pub fn monotonicity_suite(draws: usize, seed: u64) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t_ok = true;
    let mut b_ok = true;
    for _ in 0..draws {
        let pt = [
            uniform(&mut rng, 0.0, 2.0),
            uniform(&mut rng, 0.0, 3.0),
            uniform(&mut rng, 0.0, 1.5),
            uniform(&mut rng, 0.0, 0.5),
            uniform(&mut rng, 0.0, 1e-4),
        ];
        let mut last = f64::NEG_INFINITY;
        for i in 0..60 {
            let t = 0.04 * (11.0f64 / 0.04).powf(i as f64 / 59.0);
            let v = TempLinewidth.value(t, &pt);
            if v < last - 1e-12 * last.abs().max(1.0) {
                t_ok = false;
            }
            last = v;
        }

        let t_fixed = uniform(&mut rng, 0.05, 0.5);
        let model = FieldLinewidth::new(t_fixed).unwrap();
        let pb = [
            uniform(&mut rng, 0.0, 2.0),
            uniform(&mut rng, 0.0, 3.0),
            uniform(&mut rng, 0.0, 2.0),
        ];
        let mut last = f64::INFINITY;
        for i in 0..60 {
            let b = i as f64 * 5.0 / 59.0;
            let v = model.value(b, &pb);
            if v > last + 1e-12 * last.abs().max(1.0) {
                b_ok = false;
            }
            last = v;
        }
    }
    vec![
        CheckOutcome::new(
            "monotone_gamma_h_vs_t",
            t_ok,
            format!("nondecreasing in T over {draws} random parameter draws"),
        ),
        CheckOutcome::new(
            "monotone_gamma_h_vs_b",
            b_ok,
            format!("nonincreasing in B over {draws} random parameter draws"),
        ),
    ]
}

/// Physical invariants of the storage simulation on a reference comb:
/// passivity, causality, echo timing, energy accounting.
pub fn afc_invariants(grid_points: usize) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let spec = CombSpec {
        span_mhz: 12.0,
        delta_mhz: 1.0,
        finesse: 4.0,
        d_peak: 1.0,
        d0: 0.0,
        tooth_shape: ToothShape::Square,
    };
    let cfg = SimConfig { grid_points, ..Default::default() };
    match simulate_storage(&spec, &cfg) {
        Ok(run) => {
            let max_mag = run
                .transfer
                .h_wrapped()
                .iter()
                .map(|h| h.norm())
                .fold(0.0, f64::max);
            out.push(CheckOutcome::new(
                "afc_passivity",
                max_mag <= 1.0,
                format!("max |H| = {max_mag:.12}"),
            ));
            let acausal = run.transfer.acausal_energy_fraction();
            out.push(CheckOutcome::new(
                "afc_causality",
                acausal < 1e-4,
                format!("acausal impulse-response energy fraction {acausal:.2e}"),
            ));
            let timing_err = (run.echo.arrival_us - spec.storage_time_us()).abs();
            out.push(CheckOutcome::new(
                "afc_echo_timing",
                timing_err <= run.grid.dt_us(),
                format!(
                    "arrival {:.4} us vs 1/delta = {:.4} us (dt {:.4})",
                    run.echo.arrival_us,
                    spec.storage_time_us(),
                    run.grid.dt_us()
                ),
            ));
            out.push(CheckOutcome::new(
                "afc_energy_accounting",
                run.output.energy() <= run.input.energy(),
                format!(
                    "output/input energy = {:.6}",
                    run.output.energy() / run.input.energy()
                ),
            ));
        }
        Err(e) => out.push(CheckOutcome::new("afc_simulation", false, e.to_string())),
    }
    out
}

/// The whole suite at selftest-friendly sizes.
pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    let mut out = unit_anchors();
    out.extend(gradient_suite(100, seed));
    out.extend(monotonicity_suite(200, seed.wrapping_add(17)));
    out.extend(afc_invariants(1 << 15));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_anchors_pass() {
        assert!(unit_anchors().iter().all(|c| c.passed));
    }

    #[test]
    fn small_gradient_suite_passes() {
        for c in gradient_suite(20, 7) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn small_monotonicity_suite_passes() {
        for c in monotonicity_suite(25, 11) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
