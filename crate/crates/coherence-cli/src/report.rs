//! Machine- and human-readable result records with provenance.
//!
//! A params record is a text file of `key = value ± stderr  # unit` lines
//! followed by one JSON line (the structured block) that round-trips every
//! field at full precision. Each record embeds the input content hash, the
//! seed, and the tool version; rerunning with an identical configuration
//! reproduces the record byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use coherence::fitting::{Dataset, FitResult};
use coherence::models::ModelFn;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
const RECORD_MARKER: &str = "# --- record ---";

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Shortest-roundtrip float text, switching to scientific notation outside
/// a readable magnitude window. Deterministic, so records stay
/// byte-reproducible.
fn fmt_value(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if (1e-4..1e7).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("cannot hash input {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// The structured block of a fit record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub command: String,
    pub model: String,
    pub version: String,
    pub seed: u64,
    pub input_sha256: String,
    pub param_names: Vec<String>,
    pub param_units: Vec<String>,
    pub n_points: usize,
    pub fit: FitResult,
    /// Derived scalar results (e.g. the spin-coherence bound).
    pub extras: BTreeMap<String, f64>,
    /// Named boolean outcomes (e.g. the TLS-eliminated flag).
    pub flags: BTreeMap<String, bool>,
}

impl ParamsRecord {
    pub fn new(
        command: &str,
        model: &dyn ModelFn,
        data: &Dataset,
        fit: FitResult,
        seed: u64,
        input_sha256: String,
    ) -> Self {
        ParamsRecord {
            command: command.to_string(),
            model: model.name().to_string(),
            version: VERSION.to_string(),
            seed,
            input_sha256,
            param_names: model.param_names().iter().map(|s| s.to_string()).collect(),
            param_units: model.param_units().iter().map(|s| s.to_string()).collect(),
            n_points: data.len(),
            fit,
            extras: BTreeMap::new(),
            flags: BTreeMap::new(),
        }
    }

    /// Render the full record text: human-readable lines plus the JSON
    /// block. Floats print in shortest round-trip form.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# coherence params record");
        let _ = writeln!(out, "# command: {}", self.command);
        let _ = writeln!(out, "# model: {}", self.model);
        let _ = writeln!(out, "# version: {}", self.version);
        let _ = writeln!(out, "# seed: {}", self.seed);
        let _ = writeln!(out, "# input_sha256: {}", self.input_sha256);
        for (i, name) in self.param_names.iter().enumerate() {
            let _ = writeln!(
                out,
                "{name} = {} ± {}  # {}",
                fmt_value(self.fit.params[i]),
                fmt_value(self.fit.stderr[i]),
                self.param_units[i]
            );
        }
        for (name, value) in &self.extras {
            let _ = writeln!(out, "{name} = {}", fmt_value(*value));
        }
        let _ = writeln!(out, "chi2 = {}", fmt_value(self.fit.chi2));
        let _ = writeln!(out, "n_points = {}", self.n_points);
        let _ = writeln!(out, "n_iter = {}", self.fit.n_iter);
        let _ = writeln!(out, "converged = {}", self.fit.converged);
        let _ = writeln!(out, "condition_warning = {}", self.fit.condition_warning);
        for (name, value) in &self.flags {
            let _ = writeln!(out, "{name} = {value}");
        }
        let _ = writeln!(out, "{RECORD_MARKER}");
        let _ = writeln!(out, "{}", serde_json::to_string(self).expect("record serializes"));
        out
    }

    /// Parse a rendered record back from its JSON block.
    pub fn parse(text: &str) -> Result<Self> {
        let json = text
            .lines()
            .skip_while(|l| l.trim() != RECORD_MARKER)
            .nth(1)
            .ok_or_else(|| anyhow!("no structured record block found"))?;
        serde_json::from_str(json).context("invalid structured record block")
    }
}

/// Write a params record and return its path.
pub fn write_params_record(dir: &Path, stem: &str, record: &ParamsRecord) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}_params.txt"));
    std::fs::write(&path, record.render())
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

/// Residual table: x, y, sigma (when present), model, residual. Units ride
/// in the header suffixes so the file is self-describing.
pub fn write_residuals(
    dir: &Path,
    stem: &str,
    data: &Dataset,
    model: &dyn ModelFn,
    params: &[f64],
) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}_residuals.csv"));
    let xu = data.x_unit();
    let yu = data.y_unit();
    let mut out = String::new();
    if data.sigma().is_some() {
        let _ = writeln!(out, "x_{xu},y_{yu},sigma_{yu},model_{yu},residual_{yu}");
    } else {
        let _ = writeln!(out, "x_{xu},y_{yu},model_{yu},residual_{yu}");
    }
    for i in 0..data.len() {
        let x = data.x()[i];
        let y = data.y()[i];
        let m = model.value(x, params);
        match data.sigma() {
            Some(s) => {
                let _ = writeln!(out, "{x},{y},{},{m},{}", s[i], y - m);
            }
            None => {
                let _ = writeln!(out, "{x},{y},{m},{}", y - m);
            }
        }
    }
    std::fs::write(&path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

/// Generic provenance-stamped record for the simulation commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub input_sha256: String,
    pub values: BTreeMap<String, f64>,
}

impl SimRecord {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# coherence params record");
        let _ = writeln!(out, "# command: {}", self.command);
        let _ = writeln!(out, "# version: {}", self.version);
        let _ = writeln!(out, "# seed: {}", self.seed);
        let _ = writeln!(out, "# input_sha256: {}", self.input_sha256);
        for (name, value) in &self.values {
            let _ = writeln!(out, "{name} = {}", fmt_value(*value));
        }
        let _ = writeln!(out, "{RECORD_MARKER}");
        let _ = writeln!(out, "{}", serde_json::to_string(self).expect("record serializes"));
        out
    }

    pub fn write(&self, dir: &Path, stem: &str) -> Result<PathBuf> {
        let path = dir.join(format!("{stem}_params.txt"));
        std::fs::write(&path, self.render())
            .with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}
