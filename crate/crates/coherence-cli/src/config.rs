//! Run configuration: command-line flags merged over an optional TOML
//! config file (flags win). Unknown config keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use coherence::models::ToothShape;

pub const DEFAULT_SEED: u64 = 42;

/// Fully resolved configuration of one invocation. Serialized (canonical
/// JSON) it doubles as the provenance "input" for commands that take no
/// input file.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub input: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Parameters frozen at a given value, by name.
    pub fixed: BTreeMap<String, f64>,
    /// Initial-guess overrides, by name.
    pub init: BTreeMap<String, f64>,
    /// Fixed measurement temperature for field fits, K.
    pub temperature_k: Option<f64>,
    pub afc: AfcConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct AfcConfig {
    pub delta_mhz: f64,
    pub finesse: f64,
    pub d: f64,
    pub d0: f64,
    pub span_mhz: f64,
    pub tooth_shape: ToothShape,
    pub grid_points: usize,
    pub d_list: Vec<f64>,
}

impl Default for AfcConfig {
    fn default() -> Self {
        AfcConfig {
            delta_mhz: 1.0,
            finesse: 4.0,
            d: 1.0,
            d0: 0.0,
            span_mhz: 12.0,
            tooth_shape: ToothShape::Square,
            grid_points: 1 << 20,
            d_list: vec![0.2, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0],
        }
    }
}

/// Keys accepted in a TOML config file; a strict mirror of the flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub fix: Option<BTreeMap<String, f64>>,
    pub init: Option<BTreeMap<String, f64>>,
    pub temperature_k: Option<f64>,
    pub delta_mhz: Option<f64>,
    pub finesse: Option<f64>,
    pub d: Option<f64>,
    pub d0: Option<f64>,
    pub span_mhz: Option<f64>,
    pub tooth_shape: Option<String>,
    pub grid_points: Option<usize>,
    pub d_list: Option<Vec<f64>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let cfg: FileConfig = toml::from_str(&text)
            .with_context(|| format!("invalid config file {}", path.display()))?;
        Ok(cfg)
    }
}

/// Parse repeated `NAME=VALUE` flags.
pub fn parse_assignments(pairs: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for pair in pairs {
        let Some((name, value)) = pair.split_once('=') else {
            bail!("expected NAME=VALUE, got '{pair}'");
        };
        let value: f64 = value
            .trim()
            .parse()
            .with_context(|| format!("invalid numeric value in '{pair}'"))?;
        out.insert(name.trim().to_string(), value);
    }
    Ok(out)
}

/// Canonical JSON of the configuration; hashed for provenance when the
/// command has no input file.
pub fn canonical_json(config: &RunConfig) -> String {
    serde_json::to_string(config).expect("config serializes")
}
