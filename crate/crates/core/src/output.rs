//! Artifact writers: tables (CSV or JSON), structured JSON documents,
//! grayscale PGM heatmaps and the per-run manifest.
//!
//! Floating-point CSV cells use 17 significant digits so every value
//! parses back to the identical `f64`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Format};
use crate::error::{Error, Result};
use crate::lattice::SiteGrid;

/// Pixels per lattice site along each axis in heatmaps.
pub const HEATMAP_SCALE: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Float(v) => serde_json::json!(v),
            Cell::Int(v) => serde_json::json!(v),
            Cell::Text(s) => serde_json::json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
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

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(&self.columns).map_err(err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Array of row objects keyed by column name.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(k, v)| (k.clone(), v.json()))
                        .collect();
                    serde_json::Value::Object(obj)
                })
                .collect(),
        )
    }

    /// Site table `(site, x, y, value)` for a lattice field.
    pub fn site_field(grid: &SiteGrid, name: &str, values: &[f64]) -> Self {
        let mut t = Table::new(["site", "x", "y", name]);
        for (i, &v) in values.iter().enumerate() {
            let (x, y) = grid.coords(i);
            t.push(vec![i.into(), x.into(), y.into(), v.into()]);
        }
        t
    }
}

/// Binary 8-bit PGM of a site field, normalized to its maximum, with
/// `y = 0` on the top row.
pub fn heatmap_pgm(grid: &SiteGrid, values: &[f64], scale: usize) -> Vec<u8> {
    assert_eq!(values.len(), grid.len());
    let scale = scale.max(1);
    let (w, h) = (grid.width * scale, grid.height * scale);
    let max = values.iter().copied().fold(0.0_f64, f64::max);
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    for py in 0..h {
        for px in 0..w {
            let v = values[grid.index(px / scale, py / scale)];
            let level = if max > 0.0 { (v / max).clamp(0.0, 1.0) } else { 0.0 };
            out.push((level * 255.0).round() as u8);
        }
    }
    out
}

/// Record of one command invocation, written as `manifest.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_sha256: String,
    pub version: String,
    pub seed: u64,
    pub started_unix: f64,
    pub finished_unix: f64,
    /// Paths relative to the output directory, in write order.
    pub outputs: Vec<String>,
    /// Effective configuration; feeding it back reproduces the outputs.
    pub config: ExperimentConfig,
}

pub const MANIFEST_FILE: &str = "manifest.json";

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Writes artifacts into one output directory and remembers what it wrote.
#[derive(Debug)]
pub struct Sink {
    dir: PathBuf,
    format: Format,
    outputs: Vec<String>,
    started: f64,
}

impl Sink {
    pub fn create(dir: &Path, format: Format) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
            outputs: Vec::new(),
            started: unix_now(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    fn write(&mut self, name: String, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(&name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, bytes)?;
        self.outputs.push(name);
        Ok(())
    }

    /// `name.csv` or `name.json` depending on the sink format.
    pub fn table(&mut self, name: &str, table: &Table) -> Result<()> {
        match self.format {
            Format::Csv => self.write(format!("{name}.csv"), table.to_csv()?.as_bytes()),
            Format::Json => {
                let text = serde_json::to_string_pretty(&table.to_json())
                    .map_err(|e| Error::Io(e.into()))?;
                self.write(format!("{name}.json"), text.as_bytes())
            }
        }
    }

    /// Structured document, always JSON.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.into()))?;
        self.write(format!("{name}.json"), text.as_bytes())
    }

    /// Site field as a table plus a PGM image of the same name.
    pub fn field(&mut self, name: &str, grid: &SiteGrid, column: &str, values: &[f64]) -> Result<()> {
        self.table(name, &Table::site_field(grid, column, values))?;
        self.write(format!("{name}.pgm"), &heatmap_pgm(grid, values, HEATMAP_SCALE))
    }

    pub fn finish(self, command: &str, config: &ExperimentConfig) -> Result<RunManifest> {
        let manifest = RunManifest {
            command: command.to_string(),
            config_sha256: config.hash()?,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.run.seed,
            started_unix: self.started,
            finished_unix: unix_now(),
            outputs: self.outputs,
            config: config.clone(),
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.into()))?;
        fs::write(self.dir.join(MANIFEST_FILE), text)?;
        Ok(manifest)
    }
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad manifest: {e}")))
}
