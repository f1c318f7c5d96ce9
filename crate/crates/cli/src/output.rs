//! Artifact emission and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use otkit::exec::Execution;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::units::{Column, Units};

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub enum Cell {
    /// Numeric value in SI, scaled to the column's unit on output.
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Shortest round-trip text; scientific notation outside [1e-4, 1e15).
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Plot-ready table with typed columns.
pub struct Sheet {
    columns: Vec<Column>,
    rows: Vec<Vec<Cell>>,
}

impl Sheet {
    pub fn new(columns: &[Column]) -> Self {
        Sheet { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self, units: Units) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.header(units)))?;
        for row in &self.rows {
            let cells = row.iter().zip(&self.columns).map(|(cell, col)| match cell {
                Cell::Num(v) => format_number(v * col.quantity.scale(units)),
                Cell::Int(v) => v.to_string(),
                Cell::Bool(v) => v.to_string(),
                Cell::Text(s) => s.clone(),
            });
            w.write_record(cells)?;
        }
        w.into_inner().map_err(|e| CliError::io(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit: String,
    pub version: String,
    /// Command line after the program name.
    pub args: Vec<String>,
    pub seed: u64,
    pub units: Units,
    pub workers: Option<usize>,
    pub strict: bool,
    pub config_sha256: String,
    /// Effective configuration, defaults filled in.
    pub config: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
}

impl RunManifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
    }
}

pub fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

/// State shared by every subcommand: where to write, how to format, which
/// inputs were read.
pub struct RunContext {
    pub out_dir: PathBuf,
    pub units: Units,
    pub strict: bool,
    pub seed: u64,
    pub exec: Execution,
    inputs: Vec<FileRecord>,
    outputs: Vec<FileRecord>,
}

impl RunContext {
    pub fn new(out_dir: PathBuf, units: Units, strict: bool, seed: u64, exec: Execution) -> CliResult<Self> {
        fs::create_dir_all(&out_dir)
            .map_err(|e| CliError::io(format!("cannot create output directory {}: {e}", out_dir.display())))?;
        Ok(RunContext { out_dir, units, strict, seed, exec, inputs: Vec::new(), outputs: Vec::new() })
    }

    /// Reads an input file and records its checksum.
    pub fn read_input(&mut self, path: &Path) -> CliResult<Vec<u8>> {
        let bytes = fs::read(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        self.inputs.push(FileRecord {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
        Ok(bytes)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.out_dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        self.outputs.push(FileRecord { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        log::info!("wrote {}", path.display());
        Ok(())
    }

    pub fn write_sheet(&mut self, name: &str, sheet: &Sheet) -> CliResult<()> {
        let bytes = sheet.render(self.units)?;
        self.write(name, &bytes)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    pub fn outputs(&self) -> &[FileRecord] {
        &self.outputs
    }

    pub fn into_records(self) -> (Vec<FileRecord>, Vec<FileRecord>) {
        (self.inputs, self.outputs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::Quantity;

    #[test]
    fn sheet_scales_by_unit_system() {
        let mut s = Sheet::new(&[Column::new("time", Quantity::Time), Column::new("stable", Quantity::Plain)]);
        s.push(vec![0.25.into(), true.into()]);
        assert_eq!(s.render(Units::Si).unwrap(), b"time_s,stable\n0.25,true\n");
        assert_eq!(s.render(Units::Lab).unwrap(), b"time_ms,stable\n250,true\n");
    }

    #[test]
    fn number_format_round_trips() {
        for v in [0.0, 1.0, -2.5e-42, 3e-5, 1e-4, 123.456, 6.02e23, -0.3] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(format_number(1.2356913683211765e-42), "1.2356913683211765e-42");
        assert_eq!(format_number(0.25), "0.25");
    }

    #[test]
    fn checksum_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
