//! Tabular results, CSV/JSON serialization and run manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Map, Number, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    /// Positive infinity, written as "inf".
    Inf,
    Empty,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_nan() => "nan".into(),
            Cell::Float(v) if v.is_infinite() => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            // Display for f64 is the shortest string that round-trips.
            Cell::Float(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Inf => "inf".into(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => match Number::from_f64(*v) {
                Some(n) => Value::Number(n),
                None if v.is_infinite() => Value::from(if *v > 0.0 { "inf" } else { "-inf" }),
                None => Value::Null,
            },
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Inf => Value::from("inf"),
            Cell::Empty => Value::Null,
        }
    }

    fn from_json(v: &Value) -> Cell {
        match v {
            Value::Null => Cell::Empty,
            Value::Number(n) => match n.as_i64() {
                Some(i) if !n.is_f64() => Cell::Int(i),
                _ => Cell::Float(n.as_f64().unwrap_or(f64::NAN)),
            },
            Value::String(s) if s == "inf" => Cell::Inf,
            Value::String(s) => Cell::Text(s.clone()),
            other => Cell::Text(other.to_string()),
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

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(columns: &[&str]) -> Self {
        ResultTable { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    /// JSON for a `.json` extension, CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => OutputFormat::Json,
            _ => OutputFormat::Csv,
        }
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub base_seed: Option<u64>,
    pub config: Value,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, base_seed: Option<u64>, config: Value) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            base_seed,
            config,
            wall_time_seconds: 0.0,
            outputs: Vec::new(),
        }
    }
}

/// Path of the manifest written next to a CSV result file.
pub fn manifest_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io { path: path.to_path_buf(), source }
}

fn write_csv(table: &ResultTable, path: &Path) -> Result<(), OutputError> {
    let csv_err = |source| OutputError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::to_csv)).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

fn table_json(table: &ResultTable) -> Value {
    Value::Array(
        table
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (c, v) in table.columns.iter().zip(row) {
                    obj.insert(c.clone(), v.to_json());
                }
                Value::Object(obj)
            })
            .collect(),
    )
}

/// Write a result table. CSV output gets a sidecar manifest; JSON output embeds
/// it as `{"manifest": ..., "rows": [...]}`. The manifest lists every file written.
pub fn write_results(
    table: &ResultTable,
    path: &Path,
    format: OutputFormat,
    manifest: &RunManifest,
) -> Result<Vec<PathBuf>, OutputError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut manifest = manifest.clone();
    match format {
        OutputFormat::Csv => {
            write_csv(table, path)?;
            let mpath = manifest_path(path);
            manifest.outputs = vec![path.display().to_string(), mpath.display().to_string()];
            let text = serde_json::to_string_pretty(&manifest)
                .map_err(|source| OutputError::Json { path: mpath.clone(), source })?;
            fs::write(&mpath, text + "\n").map_err(io_err(&mpath))?;
            Ok(vec![path.to_path_buf(), mpath])
        }
        OutputFormat::Json => {
            manifest.outputs = vec![path.display().to_string()];
            let doc = serde_json::json!({ "manifest": manifest, "rows": table_json(table) });
            let text = serde_json::to_string_pretty(&doc)
                .map_err(|source| OutputError::Json { path: path.to_path_buf(), source })?;
            fs::write(path, text + "\n").map_err(io_err(path))?;
            Ok(vec![path.to_path_buf()])
        }
    }
}

/// Read a JSON result file written by [`write_results`].
pub fn read_json_results(path: &Path) -> Result<(Value, ResultTable), OutputError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let doc: Value = serde_json::from_str(&text).map_err(|source| OutputError::Json { path: path.to_path_buf(), source })?;
    let bad = |message: &str| OutputError::Format { path: path.to_path_buf(), message: message.into() };
    let manifest = doc.get("manifest").cloned().ok_or_else(|| bad("missing manifest"))?;
    let rows = doc.get("rows").and_then(Value::as_array).ok_or_else(|| bad("missing rows"))?;
    let mut table = ResultTable::default();
    if let Some(Value::Object(first)) = rows.first() {
        table.columns = first.keys().cloned().collect();
    }
    for row in rows {
        let obj = row.as_object().ok_or_else(|| bad("row is not an object"))?;
        table.rows.push(
            table
                .columns
                .iter()
                .map(|c| obj.get(c).map(Cell::from_json).unwrap_or(Cell::Empty))
                .collect(),
        );
    }
    Ok((manifest, table))
}

/// Read a CSV of numbers with a header row into a matrix.
pub fn read_csv_matrix(path: &Path) -> Result<nalgebra::DMatrix<f64>, OutputError> {
    let csv_err = |source| OutputError::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut data = Vec::new();
    let mut ncols = None;
    let mut nrows = 0;
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        if *ncols.get_or_insert(rec.len()) != rec.len() {
            return Err(OutputError::Format { path: path.to_path_buf(), message: "ragged rows".into() });
        }
        for field in rec.iter() {
            let v: f64 = field.trim().parse().map_err(|_| OutputError::Format {
                path: path.to_path_buf(),
                message: format!("'{field}' is not a number"),
            })?;
            data.push(v);
        }
        nrows += 1;
    }
    Ok(nalgebra::DMatrix::from_row_slice(nrows, ncols.unwrap_or(0), &data))
}

/// Write a matrix as CSV with a generated header (`prefix1`, `prefix2`, ...).
pub fn write_csv_matrix(m: &nalgebra::DMatrix<f64>, prefix: &str, path: &Path) -> Result<(), OutputError> {
    let cols: Vec<String> = (1..=m.ncols()).map(|j| format!("{prefix}{j}")).collect();
    let mut table = ResultTable { columns: cols, rows: Vec::with_capacity(m.nrows()) };
    for row in m.row_iter() {
        table.rows.push(row.iter().map(|&v| Cell::Float(v)).collect());
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    write_csv(&table, path)
}
