//! `simulate-afc` and `efficiency-curve`.
//!
//! The `--d` flag is the tooth depth above the background everywhere, so a
//! simulated comb with `--d D --d0 B` is directly comparable to the
//! closed-form efficiency η(D, F, B).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{Context, Result};

use coherence::afc::{efficiency_curve, simulate_storage, CombSpec, SimConfig, StorageRun};
use coherence::models::afc_efficiency_analytic;

use crate::config::{canonical_json, RunConfig};
use crate::plot::{render, Figure, Scale, Series};
use crate::report::{sha256_hex, SimRecord, VERSION};

fn comb_spec(cfg: &RunConfig) -> CombSpec {
    CombSpec {
        span_mhz: cfg.afc.span_mhz,
        delta_mhz: cfg.afc.delta_mhz,
        finesse: cfg.afc.finesse,
        d_peak: cfg.afc.d0 + cfg.afc.d,
        d0: cfg.afc.d0,
        tooth_shape: cfg.afc.tooth_shape,
    }
}

pub fn run_simulate(cfg: &RunConfig) -> Result<i32> {
    let spec = comb_spec(cfg);
    let sim_cfg = SimConfig { grid_points: cfg.afc.grid_points, ..Default::default() };
    let run = simulate_storage(&spec, &sim_cfg).map_err(anyhow::Error::msg)?;
    let eta_analytic =
        afc_efficiency_analytic(cfg.afc.d, spec.finesse, spec.d0, spec.tooth_shape)
            .map_err(anyhow::Error::msg)?;

    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("cannot create {}", cfg.output_dir.display()))?;

    let mut values = BTreeMap::new();
    values.insert("arrival_us".to_string(), run.echo.arrival_us);
    values.insert("efficiency".to_string(), run.echo.efficiency);
    values.insert("efficiency_analytic".to_string(), eta_analytic);
    values.insert("storage_time_us".to_string(), spec.storage_time_us());
    values.insert("window_lo_us".to_string(), run.echo.window_us.0);
    values.insert("window_hi_us".to_string(), run.echo.window_us.1);
    values.insert("dt_us".to_string(), run.grid.dt_us());
    values.insert("delta_mhz".to_string(), spec.delta_mhz);
    values.insert("finesse".to_string(), spec.finesse);
    values.insert("d".to_string(), cfg.afc.d);
    values.insert("d0".to_string(), spec.d0);
    values.insert("span_mhz".to_string(), spec.span_mhz);
    values.insert("n_teeth".to_string(), spec.n_teeth() as f64);
    values.insert("grid_points".to_string(), cfg.afc.grid_points as f64);
    let record = SimRecord {
        command: cfg.command.clone(),
        version: VERSION.to_string(),
        seed: cfg.seed,
        input_sha256: sha256_hex(canonical_json(cfg).as_bytes()),
        values,
    };
    let params_path = record.write(&cfg.output_dir, "afc")?;

    let waveforms_path = cfg.output_dir.join("afc_waveforms.csv");
    let (in_pts, out_pts) = waveform_window(&run);
    let mut table = String::from("t_us,input_intensity,output_intensity\n");
    for (a, b) in in_pts.iter().zip(&out_pts) {
        let _ = writeln!(table, "{},{},{}", a.0, a.1, b.1);
    }
    std::fs::write(&waveforms_path, table)
        .with_context(|| format!("cannot write {}", waveforms_path.display()))?;

    let plot_path = cfg.output_dir.join("afc_echo.svg");
    let figure = Figure {
        title: format!(
            "AFC storage: delta = {} MHz, F = {}, d = {}, d0 = {}",
            spec.delta_mhz, spec.finesse, cfg.afc.d, spec.d0
        ),
        x_label: "time (us)".to_string(),
        y_label: "intensity (arb)".to_string(),
        x_scale: Scale::Linear,
        y_scale: Scale::Linear,
    };
    let series = [
        Series { label: "input", points: in_pts, y_err: None, markers: false, color: "black" },
        Series {
            label: "output (echo)",
            points: out_pts,
            y_err: None,
            markers: false,
            color: "crimson",
        },
    ];
    render(&plot_path, &figure, &series)?;

    print!("{}", record.render());
    eprintln!(
        "wrote {}, {}, {}",
        params_path.display(),
        waveforms_path.display(),
        plot_path.display()
    );
    Ok(0)
}

/// Full-resolution samples over the interesting range: just before the
/// input pulse to past the first echo.
fn waveform_window(run: &StorageRun) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let storage = run.spec.storage_time_us();
    let fwhm = run.input.intensity_fwhm_us().unwrap_or(run.input.dt_us());
    let (t_lo, t_hi) = (-3.0 * fwhm, 2.4 * storage);
    let mut input = Vec::new();
    let mut output = Vec::new();
    for i in 0..run.input.len() {
        let t = run.input.time_at(i);
        if t >= t_lo && t <= t_hi {
            input.push((t, run.input.samples()[i].norm_sqr()));
            output.push((t, run.output.samples()[i].norm_sqr()));
        }
    }
    (input, output)
}

pub fn run_efficiency_curve(cfg: &RunConfig) -> Result<i32> {
    let template = comb_spec(cfg);
    let sim_cfg = SimConfig { grid_points: cfg.afc.grid_points, ..Default::default() };
    let points =
        efficiency_curve(&template, &cfg.afc.d_list, &sim_cfg).map_err(anyhow::Error::msg)?;

    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("cannot create {}", cfg.output_dir.display()))?;

    let csv_path = cfg.output_dir.join("efficiency_curve.csv");
    let mut table = String::from("d,eta_numeric,eta_analytic\n");
    for p in &points {
        let _ = writeln!(table, "{},{},{}", p.d, p.eta_numeric, p.eta_analytic);
    }
    std::fs::write(&csv_path, table)
        .with_context(|| format!("cannot write {}", csv_path.display()))?;

    let mut values = BTreeMap::new();
    values.insert("finesse".to_string(), template.finesse);
    values.insert("d0".to_string(), template.d0);
    values.insert("delta_mhz".to_string(), template.delta_mhz);
    values.insert("span_mhz".to_string(), template.span_mhz);
    values.insert("n_points".to_string(), points.len() as f64);
    let worst = points
        .iter()
        .filter(|p| p.eta_analytic > 0.0)
        .map(|p| (p.eta_numeric - p.eta_analytic).abs() / p.eta_analytic)
        .fold(0.0, f64::max);
    values.insert("max_relative_deviation".to_string(), worst);
    let record = SimRecord {
        command: cfg.command.clone(),
        version: VERSION.to_string(),
        seed: cfg.seed,
        input_sha256: sha256_hex(canonical_json(cfg).as_bytes()),
        values,
    };
    let params_path = record.write(&cfg.output_dir, "efficiency")?;

    let plot_path = cfg.output_dir.join("efficiency_curve.svg");
    let figure = Figure {
        title: format!(
            "AFC recall efficiency vs depth (F = {}, d0 = {}, {} teeth)",
            template.finesse,
            template.d0,
            template.n_teeth()
        ),
        x_label: "tooth depth d".to_string(),
        y_label: "efficiency".to_string(),
        x_scale: Scale::Linear,
        y_scale: Scale::Linear,
    };
    let series = [
        Series {
            label: "simulated",
            points: points.iter().map(|p| (p.d, p.eta_numeric)).collect(),
            y_err: None,
            markers: true,
            color: "black",
        },
        Series {
            label: "closed form",
            points: points.iter().map(|p| (p.d, p.eta_analytic)).collect(),
            y_err: None,
            markers: false,
            color: "crimson",
        },
    ];
    render(&plot_path, &figure, &series)?;

    print!("{}", record.render());
    eprintln!(
        "wrote {}, {}, {}",
        params_path.display(),
        csv_path.display(),
        plot_path.display()
    );
    Ok(0)
}
