//! CSV and metadata writers.
//!
//! Floats are written in the shortest decimal form that parses back to the
//! same `f64`, so identical runs give byte-identical files.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => format_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Shortest round-trip decimal.
pub fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> std::io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }

    /// Numeric column by name, for checks on results.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[k] {
                    Cell::Float(x) => *x,
                    Cell::Int(i) => *i as f64,
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }
}

/// Result of one experiment before anything touches the disk.
#[derive(Debug, Clone)]
pub struct Artifacts {
    /// Written to `{prefix}.csv`.
    pub main: Table,
    /// Written to `{prefix}.{name}.csv`.
    pub extra: Vec<(String, Table)>,
    pub summary: Value,
}

/// Output prefix after applying the directory override.
pub fn resolve_prefix(output: &str, override_dir: Option<&Path>) -> PathBuf {
    let p = PathBuf::from(output);
    match override_dir {
        Some(dir) if p.is_absolute() => dir.join(p.file_name().unwrap_or_default()),
        Some(dir) => dir.join(p),
        None => p,
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn metadata(cfg: &ExperimentConfig, status: &str, files: &[PathBuf], summary: Value) -> Value {
    json!({
        "status": status,
        "config": cfg,
        "seed": cfg.seed,
        "versions": { "opensys_cli": env!("CARGO_PKG_VERSION"), "opensys_core": opensys_core::VERSION },
        "csv_float_format": "shortest round-trip decimal",
        "files": files.iter().map(|f| f.file_name().map(|n| n.to_string_lossy().into_owned())).collect::<Vec<_>>(),
        "summary": summary,
    })
}

/// Writes every file to a temporary name first and renames once all writes
/// have succeeded.
pub fn write_all(prefix: &Path, cfg: &ExperimentConfig, artifacts: &Artifacts) -> std::io::Result<Vec<PathBuf>> {
    let mut outputs: Vec<(PathBuf, Vec<u8>)> = vec![(with_suffix(prefix, ".csv"), artifacts.main.to_csv()?)];
    for (name, table) in &artifacts.extra {
        outputs.push((with_suffix(prefix, &format!(".{name}.csv")), table.to_csv()?));
    }
    let csv_paths: Vec<PathBuf> = outputs.iter().map(|o| o.0.clone()).collect();
    let meta = metadata(cfg, "ok", &csv_paths, artifacts.summary.clone());
    outputs.push((with_suffix(prefix, ".meta.json"), to_pretty(&meta)));
    commit(outputs)
}

/// Metadata only, marking a run that stopped without converging.
pub fn write_failure(prefix: &Path, cfg: &ExperimentConfig, status: &str, message: &str) -> std::io::Result<PathBuf> {
    let meta = metadata(cfg, status, &[], json!({ "error": message, "partial": true }));
    let path = with_suffix(prefix, ".meta.json");
    commit(vec![(path.clone(), to_pretty(&meta))])?;
    Ok(path)
}

fn to_pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("JSON values always serialize");
    s.push(b'\n');
    s
}

fn commit(outputs: Vec<(PathBuf, Vec<u8>)>) -> std::io::Result<Vec<PathBuf>> {
    let mut staged = Vec::with_capacity(outputs.len());
    for (path, bytes) in outputs {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
            _ => PathBuf::from("."),
        };
        std::fs::create_dir_all(&dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
        tmp.write_all(&bytes)?;
        tmp.flush()?;
        staged.push((tmp, path));
    }
    let mut written = Vec::with_capacity(staged.len());
    for (tmp, path) in staged {
        tmp.persist(&path).map_err(|e| e.error)?;
        written.push(path);
    }
    Ok(written)
}
