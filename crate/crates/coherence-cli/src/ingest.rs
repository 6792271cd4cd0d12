//! Dataset ingestion from self-describing CSV files.
//!
//! The header row names the columns in (x, y[, sigma]) order and encodes
//! units as a suffix after the last underscore, e.g. `T_K,gamma_kHz,sigma_kHz`
//! or `tau_us,amp`. Each subcommand declares which units it expects;
//! a missing or unknown suffix is a hard error naming the line, never a
//! guess. Lines starting with `#` are comments.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use coherence::fitting::Dataset;

/// Unit expectation for one column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitReq {
    /// The header must end in `_<unit>` with exactly this unit.
    Exact(&'static str),
    /// Arbitrary-unit column (raw amplitudes); any name accepted.
    Arb,
}

/// Expected schema of a two-or-three-column dataset file.
#[derive(Debug, Clone, Copy)]
pub struct CsvSchema {
    pub x_unit: UnitReq,
    pub y_unit: UnitReq,
}

fn unit_suffix(name: &str) -> Option<&str> {
    name.rsplit_once('_').map(|(_, unit)| unit)
}

fn check_unit(column: &str, req: UnitReq, role: &str) -> Result<String> {
    match req {
        UnitReq::Exact(expected) => match unit_suffix(column) {
            Some(unit) if unit == expected => Ok(expected.to_string()),
            Some(unit) => bail!(
                "schema error at line 1: {role} column '{column}' has unit \
                 suffix '{unit}', expected '{expected}'"
            ),
            None => bail!(
                "schema error at line 1: {role} column '{column}' is missing \
                 a unit suffix (expected '_{expected}')"
            ),
        },
        UnitReq::Arb => Ok("arb".to_string()),
    }
}

/// Load, unit-validate, and sort a dataset. Duplicate x values are allowed;
/// the caller can inspect [`Dataset::has_duplicate_x`] and warn.
pub fn load_dataset(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    let raw = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;

    let mut lines = raw.lines().enumerate();
    let (_, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .ok_or_else(|| anyhow!("schema error at line 1: file has no header row"))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.len() < 2 || columns.len() > 3 {
        bail!(
            "schema error at line 1: expected 2 or 3 columns (x, y[, sigma]), \
             found {}",
            columns.len()
        );
    }
    let x_unit = check_unit(columns[0], schema.x_unit, "x")?;
    let y_unit = check_unit(columns[1], schema.y_unit, "y")?;
    if let Some(sigma_col) = columns.get(2) {
        if !sigma_col.starts_with("sigma") {
            bail!(
                "schema error at line 1: third column '{sigma_col}' should be \
                 named 'sigma' (with the y unit suffix)"
            );
        }
        if let UnitReq::Exact(expected) = schema.y_unit {
            match unit_suffix(sigma_col) {
                Some(unit) if unit == expected => {}
                _ => bail!(
                    "schema error at line 1: sigma column '{sigma_col}' must \
                     carry the y unit suffix '_{expected}'"
                ),
            }
        }
    }
    let has_sigma = columns.len() == 3;

    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut sigma = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            bail!(
                "parse error at line {line_no}: expected {} fields, found {}",
                columns.len(),
                fields.len()
            );
        }
        let parse = |s: &str, col: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| anyhow!("parse error at line {line_no}: '{s}' in column {col}"))
        };
        x.push(parse(fields[0], columns[0])?);
        y.push(parse(fields[1], columns[1])?);
        if has_sigma {
            sigma.push(parse(fields[2], columns[2])?);
        }
    }
    if x.is_empty() {
        bail!("dataset {} contains no data rows", path.display());
    }

    let dataset = Dataset::new(x, y, if has_sigma { Some(sigma) } else { None })
        .map_err(|e| anyhow!("{e} (in {})", path.display()))?
        .with_units(x_unit, y_unit);
    Ok(dataset)
}
