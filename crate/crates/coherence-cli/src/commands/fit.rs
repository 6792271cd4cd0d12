//! The five fitting subcommands share one driver: load and validate the
//! CSV, apply --init/--fix overrides on top of the model's guess, run the
//! fit, and emit the report bundle (params record, residual table, plot).

use std::path::Path;

use anyhow::{bail, Context, Result};

use coherence::fitting::{lm_fit, Dataset, FitOptions};
use coherence::models::{
    spin_t2_bound, tls_eliminated, DoubleExpModel, FieldLinewidth, LorentzianModel, Mims,
    ModelFn, TempLinewidth,
};
use coherence::synth::{lin_spaced, log_spaced};

use crate::config::RunConfig;
use crate::ingest::{load_dataset, CsvSchema, UnitReq};
use crate::plot::{render, Figure, Scale, Series};
use crate::report::{sha256_file, write_params_record, write_residuals, ParamsRecord};

struct FitPlan<'a> {
    model: &'a dyn ModelFn,
    schema: CsvSchema,
    x_label: &'a str,
    y_label: &'a str,
    x_scale: Scale,
    y_scale: Scale,
}

pub fn run(cfg: &RunConfig) -> Result<i32> {
    let field_model;
    let plan = match cfg.command.as_str() {
        "fit-decay" => FitPlan {
            model: &Mims,
            schema: CsvSchema { x_unit: UnitReq::Exact("us"), y_unit: UnitReq::Arb },
            x_label: "pulse separation (us)",
            y_label: "echo amplitude (arb)",
            x_scale: Scale::Linear,
            y_scale: Scale::Log10,
        },
        "fit-temperature" => FitPlan {
            model: &TempLinewidth,
            schema: CsvSchema { x_unit: UnitReq::Exact("K"), y_unit: UnitReq::Exact("kHz") },
            x_label: "temperature (K)",
            y_label: "homogeneous linewidth (kHz)",
            x_scale: Scale::Log10,
            y_scale: Scale::Log10,
        },
        "fit-field" => {
            let t_fixed = cfg
                .temperature_k
                .context("fit-field requires --temperature-k (measurement temperature)")?;
            field_model = FieldLinewidth::new(t_fixed).map_err(anyhow::Error::msg)?;
            FitPlan {
                model: &field_model,
                schema: CsvSchema { x_unit: UnitReq::Exact("T"), y_unit: UnitReq::Exact("kHz") },
                x_label: "magnetic field (T)",
                y_label: "homogeneous linewidth (kHz)",
                x_scale: Scale::Linear,
                y_scale: Scale::Linear,
            }
        }
        "fit-hole" => FitPlan {
            model: &DoubleExpModel,
            schema: CsvSchema { x_unit: UnitReq::Exact("h"), y_unit: UnitReq::Arb },
            x_label: "delay (h)",
            y_label: "hole area (arb)",
            x_scale: Scale::Linear,
            y_scale: Scale::Linear,
        },
        "fit-line" => FitPlan {
            model: &LorentzianModel,
            schema: CsvSchema { x_unit: UnitReq::Exact("GHz"), y_unit: UnitReq::Arb },
            x_label: "detuning (GHz)",
            y_label: "absorption (arb)",
            x_scale: Scale::Linear,
            y_scale: Scale::Linear,
        },
        other => bail!("unknown fit command '{other}'"),
    };
    run_with_plan(cfg, &plan)
}

fn run_with_plan(cfg: &RunConfig, plan: &FitPlan<'_>) -> Result<i32> {
    let input = cfg
        .input
        .as_ref()
        .with_context(|| format!("{} requires --input", cfg.command))?;
    let data = load_dataset(input, &plan.schema)?;
    if data.has_duplicate_x() {
        eprintln!(
            "warning: {} contains duplicate x values; they are kept and weighted as given",
            input.display()
        );
    }

    let model = plan.model;
    let names = model.param_names();
    for name in cfg.fixed.keys().chain(cfg.init.keys()) {
        if !names.contains(&name.as_str()) {
            bail!(
                "unknown parameter '{name}' for model {} (parameters: {})",
                model.name(),
                names.join(", ")
            );
        }
    }
    let mut init = model.guess(&data);
    let mut frozen = vec![false; names.len()];
    for (name, value) in &cfg.init {
        init[names.iter().position(|n| n == name).unwrap()] = *value;
    }
    for (name, value) in &cfg.fixed {
        let idx = names.iter().position(|n| n == name).unwrap();
        init[idx] = *value;
        frozen[idx] = true;
    }
    let opts = FitOptions { init: Some(init), frozen: Some(frozen), ..Default::default() };
    let fit = lm_fit(model, &data, &opts).map_err(anyhow::Error::msg)?;

    let mut record = ParamsRecord::new(
        &cfg.command,
        model,
        &data,
        fit,
        cfg.seed,
        sha256_file(input)?,
    );
    match cfg.command.as_str() {
        "fit-temperature" => {
            let eliminated = tls_eliminated(record.fit.params[3]);
            if eliminated {
                record.fit.params[3] = 0.0;
            }
            record.flags.insert("tls_eliminated".to_string(), eliminated);
        }
        "fit-hole" => {
            let tau2 = record.fit.params[3];
            if let Ok(bound) = spin_t2_bound(tau2) {
                record.extras.insert("spin_t2_bound_h".to_string(), bound);
            }
        }
        "fit-field" => {
            record
                .extras
                .insert("t_fixed_k".to_string(), cfg.temperature_k.unwrap());
        }
        _ => {}
    }

    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("cannot create {}", cfg.output_dir.display()))?;
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| cfg.command.clone());

    let params_path = write_params_record(&cfg.output_dir, &stem, &record)?;
    let residuals_path =
        write_residuals(&cfg.output_dir, &stem, &data, model, &record.fit.params)?;
    let plot_path = cfg.output_dir.join(format!("{stem}_fit.svg"));
    write_fit_plot(&plot_path, plan, &data, &record.fit.params)?;

    // data to stdout, diagnostics to stderr
    print!("{}", record.render());
    eprintln!(
        "wrote {}, {}, {}",
        params_path.display(),
        residuals_path.display(),
        plot_path.display()
    );
    if !record.fit.converged {
        eprintln!("fit did not converge");
        return Ok(2);
    }
    Ok(0)
}

fn write_fit_plot(
    path: &Path,
    plan: &FitPlan<'_>,
    data: &Dataset,
    params: &[f64],
) -> Result<()> {
    let (x0, x1) = (data.x()[0], data.x()[data.len() - 1]);
    let grid = match plan.x_scale {
        Scale::Log10 if x0 > 0.0 => log_spaced(x0, x1, 256),
        _ => lin_spaced(x0, x1, 256),
    };
    let curve: Vec<(f64, f64)> = grid
        .iter()
        .map(|&x| (x, plan.model.value(x, params)))
        .collect();
    let figure = Figure {
        title: format!("{} fit", plan.model.name()),
        x_label: plan.x_label.to_string(),
        y_label: plan.y_label.to_string(),
        x_scale: plan.x_scale,
        y_scale: plan.y_scale,
    };
    let series = [
        Series {
            label: "data",
            points: data.x().iter().cloned().zip(data.y().iter().cloned()).collect(),
            y_err: data.sigma().map(|s| s.to_vec()),
            markers: true,
            color: "black",
        },
        Series { label: "fit", points: curve, y_err: None, markers: false, color: "crimson" },
    ];
    render(path, &figure, &series)
}
