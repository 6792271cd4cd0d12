//! Command-line toolkit for rare-earth-ion coherence spectroscopy: echo,
//! linewidth, lineshape, and hole-decay fits plus an atomic-frequency-comb
//! storage simulator.
//!
//! Exit codes: 0 on success (fits converged, selftest clean), 2 when a fit
//! does not converge or a selftest check fails, 1 on usage errors.

mod commands;
mod config;
mod ingest;
mod plot;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{parse_assignments, AfcConfig, FileConfig, RunConfig, DEFAULT_SEED};

#[derive(Parser)]
#[command(
    name = "coherence",
    version,
    about = "Coherence-spectroscopy fitting and AFC storage simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a stretched-exponential photon-echo decay (CSV: tau_us,amp[,sigma])
    FitDecay(FitArgs),
    /// Fit linewidth vs temperature (CSV: T_K,gamma_kHz[,sigma_kHz])
    FitTemperature(FitArgs),
    /// Fit linewidth vs magnetic field at fixed temperature (CSV: B_T,gamma_kHz[,sigma_kHz])
    FitField(FitFieldArgs),
    /// Fit a double-exponential hole-area decay (CSV: t_h,area[,sigma])
    FitHole(FitArgs),
    /// Fit a Lorentzian lineshape (CSV: nu_GHz,amp[,sigma])
    FitLine(FitArgs),
    /// Simulate AFC storage of a Gaussian pulse and report the echo
    SimulateAfc(AfcArgs),
    /// Sweep tooth depth: simulated vs closed-form recall efficiency
    EfficiencyCurve(CurveArgs),
    /// Run the built-in verification suite
    Selftest(CommonArgs),
}

#[derive(Args, Default)]
struct CommonArgs {
    /// TOML config file; command-line flags win over its keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the report bundle (default ".")
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// 64-bit seed, recorded in every output artifact
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Default)]
struct FitArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Input CSV with unit-suffixed headers
    #[arg(long)]
    input: Option<PathBuf>,
    /// Freeze a parameter at a value: NAME=VALUE (repeatable)
    #[arg(long = "fix", value_name = "NAME=VALUE")]
    fix: Vec<String>,
    /// Override an initial guess: NAME=VALUE (repeatable)
    #[arg(long = "init", value_name = "NAME=VALUE")]
    init: Vec<String>,
}

#[derive(Args, Default)]
struct FitFieldArgs {
    #[command(flatten)]
    fit: FitArgs,
    /// Measurement temperature in kelvin (held fixed, not fitted)
    #[arg(long)]
    temperature_k: Option<f64>,
}

#[derive(Args, Default)]
struct AfcArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Tooth spacing in MHz; the echo appears at 1/delta µs
    #[arg(long)]
    delta_mhz: Option<f64>,
    /// Comb finesse F = spacing / tooth width
    #[arg(long)]
    finesse: Option<f64>,
    /// Tooth optical depth above the background
    #[arg(long)]
    d: Option<f64>,
    /// Background optical depth
    #[arg(long)]
    d0: Option<f64>,
    /// Prepared comb span in MHz
    #[arg(long)]
    span_mhz: Option<f64>,
    /// Tooth shape: square | gaussian
    #[arg(long)]
    tooth_shape: Option<String>,
    /// Simulation grid size (power of two)
    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(Args, Default)]
struct CurveArgs {
    #[command(flatten)]
    afc: AfcArgs,
    /// Comma-separated tooth depths to sweep
    #[arg(long, value_delimiter = ',')]
    d_list: Option<Vec<f64>>,
}

fn resolve(
    command: &str,
    common: &CommonArgs,
    input: Option<PathBuf>,
    fix: &[String],
    init: &[String],
    temperature_k: Option<f64>,
    afc_flags: Option<&AfcArgs>,
    d_list: Option<Vec<f64>>,
) -> Result<RunConfig> {
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };

    let mut fixed = file.fix.clone().unwrap_or_default();
    fixed.extend(parse_assignments(fix)?);
    let mut init_map = file.init.clone().unwrap_or_default();
    init_map.extend(parse_assignments(init)?);

    let defaults = AfcConfig::default();
    let tooth_shape = match afc_flags
        .and_then(|a| a.tooth_shape.clone())
        .or_else(|| file.tooth_shape.clone())
    {
        Some(s) => s.parse().map_err(anyhow::Error::msg)?,
        None => defaults.tooth_shape,
    };
    let afc = AfcConfig {
        delta_mhz: afc_flags.and_then(|a| a.delta_mhz).or(file.delta_mhz).unwrap_or(defaults.delta_mhz),
        finesse: afc_flags.and_then(|a| a.finesse).or(file.finesse).unwrap_or(defaults.finesse),
        d: afc_flags.and_then(|a| a.d).or(file.d).unwrap_or(defaults.d),
        d0: afc_flags.and_then(|a| a.d0).or(file.d0).unwrap_or(defaults.d0),
        span_mhz: afc_flags.and_then(|a| a.span_mhz).or(file.span_mhz).unwrap_or(defaults.span_mhz),
        tooth_shape,
        grid_points: afc_flags
            .and_then(|a| a.grid_points)
            .or(file.grid_points)
            .unwrap_or(defaults.grid_points),
        d_list: d_list.or_else(|| file.d_list.clone()).unwrap_or(defaults.d_list),
    };

    Ok(RunConfig {
        command: command.to_string(),
        input: input.or_else(|| file.input.clone()),
        output_dir: common
            .output_dir
            .clone()
            .or_else(|| file.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from(".")),
        seed: common.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        fixed,
        init: init_map,
        temperature_k: temperature_k.or(file.temperature_k),
        afc,
    })
}

fn dispatch(cli: Cli) -> Result<i32> {
    match &cli.command {
        Command::FitDecay(a)
        | Command::FitTemperature(a)
        | Command::FitHole(a)
        | Command::FitLine(a) => {
            let name = match &cli.command {
                Command::FitDecay(_) => "fit-decay",
                Command::FitTemperature(_) => "fit-temperature",
                Command::FitHole(_) => "fit-hole",
                _ => "fit-line",
            };
            let cfg = resolve(name, &a.common, a.input.clone(), &a.fix, &a.init, None, None, None)?;
            commands::fit::run(&cfg)
        }
        Command::FitField(a) => {
            let cfg = resolve(
                "fit-field",
                &a.fit.common,
                a.fit.input.clone(),
                &a.fit.fix,
                &a.fit.init,
                a.temperature_k,
                None,
                None,
            )?;
            commands::fit::run(&cfg)
        }
        Command::SimulateAfc(a) => {
            let cfg = resolve("simulate-afc", &a.common, None, &[], &[], None, Some(a), None)?;
            commands::afc::run_simulate(&cfg)
        }
        Command::EfficiencyCurve(a) => {
            let cfg = resolve(
                "efficiency-curve",
                &a.afc.common,
                None,
                &[],
                &[],
                None,
                Some(&a.afc),
                a.d_list.clone(),
            )?;
            commands::afc::run_efficiency_curve(&cfg)
        }
        Command::Selftest(common) => {
            let cfg = resolve("selftest", common, None, &[], &[], None, None, None)?;
            commands::selftest::run(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1u8,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
