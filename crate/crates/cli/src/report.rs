//! Tabular output (CSV or JSON) and the run manifest.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rydqed::perturb::Convergence;
use rydqed::units::{PhysicalConstants, CODATA};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{Format, RunConfig};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            // Shortest round-trip representation, `.` decimal point.
            Cell::Float(v) => format!("{v:e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => serde_json::Number::from_f64(*v).map(Value::Number).unwrap_or(Value::Null),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        // adding +0.0 maps -0.0 to 0.0
        Cell::Float(v + 0.0)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::csv))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let mut m = Map::new();
                    for (c, v) in self.columns.iter().zip(row) {
                        m.insert(c.to_string(), v.json());
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

/// A command's result: rows, a summary object and any flags raised.
#[derive(Debug, Default)]
pub struct Outcome {
    pub table: Table,
    pub summary: Map<String, Value>,
    pub convergence: Vec<CutoffRecord>,
    /// Convergence or check failures; any entry gives exit status 2.
    pub flags: Vec<String>,
    /// Informational warnings that do not change the exit status.
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn summary_value<T: Serialize>(&mut self, key: &str, v: T) {
        self.summary.insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CutoffRecord {
    pub n: u32,
    pub quantity: String,
    pub cutoffs: Vec<u32>,
    pub achieved_rel: f64,
    pub target_rel: f64,
    pub converged: bool,
}

impl CutoffRecord {
    pub fn new(n: u32, quantity: &str, c: &Convergence) -> Self {
        Self {
            n,
            quantity: quantity.to_string(),
            cutoffs: c.cutoffs.clone(),
            achieved_rel: c.achieved_rel,
            target_rel: c.target_rel,
            converged: c.converged,
        }
    }
}

/// Writes the table (CSV) or table plus summary (JSON).
pub fn write_outcome(out: &Outcome, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        Format::Csv => out.table.write_csv(sink),
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("rows".into(), out.table.json_rows());
            doc.insert("summary".into(), Value::Object(out.summary.clone()));
            let mut sink = sink;
            serde_json::to_writer_pretty(&mut sink, &Value::Object(doc))?;
            sink.write_all(b"\n")?;
            sink.flush()?;
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CacheRecord {
    pub path: Option<String>,
    pub hits: u64,
    pub misses: u64,
    pub entries: usize,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub timestamp_unix: u64,
    pub wall_time_s: f64,
    pub config: &'a RunConfig,
    pub constants: PhysicalConstants,
    pub convergence: &'a [CutoffRecord],
    pub cache: CacheRecord,
    pub flags: &'a [String],
    pub warnings: &'a [String],
    pub summary: &'a Map<String, Value>,
}

impl<'a> Manifest<'a> {
    pub fn new(config: &'a RunConfig, outcome: &'a Outcome, wall_time_s: f64) -> Self {
        let cache = rydqed::cache::global();
        let stats = cache.stats();
        Self {
            tool: "rydqed",
            version: env!("CARGO_PKG_VERSION"),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            wall_time_s,
            config,
            constants: CODATA,
            convergence: &outcome.convergence,
            cache: CacheRecord {
                path: cache.path().map(|p| p.display().to_string()),
                hits: stats.hits,
                misses: stats.misses,
                entries: stats.entries,
            },
            flags: &outcome.flags,
            warnings: &outcome.warnings,
            summary: &outcome.summary,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut f = io::BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?);
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        f.flush()?;
        Ok(())
    }
}
