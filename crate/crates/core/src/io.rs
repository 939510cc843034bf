//! File formats.
//!
//! * States: `{"dim": d, "re": [..], "im": [..]}`; density matrices use the
//!   same keys with row-major nested arrays.
//! * Probability tables: CSV with header `basis,p_0,…,p_{d-1}` and one row
//!   per basis, plus a JSON sidecar (same stem, `.json`) holding counts and
//!   the hash of the basis set.
//! * Patterns: CSV with header `x_m,intensity`, plus a JSON sidecar with the
//!   multiplex positions and envelope factors.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{self, InterferencePattern, OpticalConfig, Prepared};
use crate::qudit::{DensityMatrix, QuditState};
use crate::tomography::ProbabilityTable;

/// Either kind of state file.
#[derive(Debug, Clone, PartialEq)]
pub enum StateFile {
    Pure(QuditState),
    Mixed(DensityMatrix),
}

impl StateFile {
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let nested = value.get("re").and_then(|re| re.get(0)).is_some_and(serde_json::Value::is_array);
        if nested {
            Ok(StateFile::Mixed(serde_json::from_value(value)?))
        } else {
            Ok(StateFile::Pure(serde_json::from_value(value)?))
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn prepared(&self) -> Prepared<'_> {
        match self {
            StateFile::Pure(s) => s.into(),
            StateFile::Mixed(r) => r.into(),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            StateFile::Pure(s) => DensityMatrix::from_pure(s),
            StateFile::Mixed(r) => r.clone(),
        }
    }
}

/// `foo/table.csv` → `foo/table.json` (`foo/table.sidecar.json` when the
/// data file itself ends in `.json`).
pub fn sidecar_path(path: &Path) -> PathBuf {
    let candidate = path.with_extension("json");
    if candidate == path {
        path.with_extension("sidecar.json")
    } else {
        candidate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSidecar {
    pub dim: usize,
    pub settings: usize,
    pub set_hash: String,
    pub photons_per_setting: Option<u64>,
    pub counts: Option<Vec<Vec<u64>>>,
}

pub fn table_to_csv(table: &ProbabilityTable) -> String {
    let mut out = String::from("basis");
    for m in 0..table.dim {
        out.push_str(&format!(",p_{m}"));
    }
    out.push('\n');
    for (j, row) in table.rows.iter().enumerate() {
        out.push_str(&j.to_string());
        for p in row {
            out.push_str(&format!(",{p}"));
        }
        out.push('\n');
    }
    out
}

/// Parse the CSV body; rows are renormalized as measured data.
pub fn table_from_csv(text: &str, settings: usize) -> Result<ProbabilityTable> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Format("empty table".into()))?;
    let dim = header.split(',').count().saturating_sub(1);
    if !header.starts_with("basis") || dim < 2 {
        return Err(Error::Format(format!("unexpected table header {header:?}")));
    }
    let rows = lines
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != dim + 1 || fields[0] != i.to_string() {
                return Err(Error::Format(format!("malformed table row {line:?}")));
            }
            fields[1..]
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| Error::Format(format!("{f:?}: {e}"))))
                .collect()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    ProbabilityTable::from_measured(dim, rows, settings)
}

pub fn write_table(path: &Path, table: &ProbabilityTable, sidecar: &TableSidecar) -> Result<()> {
    fs::write(path, table_to_csv(table))?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(sidecar)? + "\n")?;
    Ok(())
}

/// Read a table and, if present, its sidecar.
pub fn read_table(path: &Path) -> Result<(ProbabilityTable, Option<TableSidecar>)> {
    let side = sidecar_path(path);
    let sidecar: Option<TableSidecar> = if side.exists() {
        Some(serde_json::from_str(&fs::read_to_string(&side)?)?)
    } else {
        None
    };
    let text = fs::read_to_string(path)?;
    let settings_hint = sidecar.as_ref().map(|s| s.settings);
    let mut table = table_from_csv(&text, 0)?;
    table.settings = settings_hint.unwrap_or(table.dim + 1);
    if let Some(s) = &sidecar {
        if s.dim != table.dim {
            return Err(Error::DimensionMismatch { expected: s.dim, found: table.dim });
        }
        table.counts = s.counts.clone();
    }
    Ok((table, sidecar))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSidecar {
    pub dim: usize,
    pub basis: usize,
    pub config: OpticalConfig,
    pub multiplex_positions: Vec<f64>,
    pub multiplex_indices: Vec<usize>,
    pub envelope_factors: Vec<f64>,
    pub multiplex_intensities: Vec<f64>,
    /// Outcome probabilities read from the pattern, in basis-element order.
    pub probabilities: Vec<f64>,
    pub multiplex_power_ratio: f64,
}

impl PatternSidecar {
    pub fn new(pattern: &InterferencePattern, basis: usize) -> Result<Self> {
        Ok(Self {
            dim: pattern.config.dim,
            basis,
            config: pattern.config,
            multiplex_positions: pattern.multiplex_positions(),
            multiplex_indices: pattern.multiplex_indices.clone(),
            envelope_factors: optics::envelope_factors(&pattern.config)?,
            multiplex_intensities: pattern.multiplex_intensities.clone(),
            probabilities: optics::extract_probabilities(pattern)?,
            multiplex_power_ratio: pattern.multiplex_power_ratio(),
        })
    }
}

pub fn pattern_to_csv(pattern: &InterferencePattern) -> String {
    let mut out = String::from("x_m,intensity\n");
    for (x, i) in pattern.x_grid.iter().zip(&pattern.intensities) {
        out.push_str(&format!("{x:e},{i:e}\n"));
    }
    out
}

pub fn write_pattern(path: &Path, pattern: &InterferencePattern, basis: usize) -> Result<()> {
    fs::write(path, pattern_to_csv(pattern))?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&PatternSidecar::new(pattern, basis)?)? + "\n")?;
    Ok(())
}

/// Parse a pattern CSV back into `(x, intensity)` pairs.
pub fn read_pattern_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("x_m,intensity") {
        return Err(Error::Format("pattern CSV must start with header x_m,intensity".into()));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (x, i) = l.split_once(',').ok_or_else(|| Error::Format(format!("malformed row {l:?}")))?;
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("{s:?}: {e}")));
            Ok((parse(x)?, parse(i)?))
        })
        .collect()
}
