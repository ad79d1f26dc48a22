//! CSV tables and JSON summaries.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::config::SCHEMA_VERSION;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Self::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Self::Int(u64::from(v))
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Float(v)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Self::Int(v) => v.to_string(),
            // Shortest representation that parses back to the same value.
            Self::Float(v) => v.to_string(),
        }
    }
}

/// Rows under a fixed header. Column names carry their unit suffix
/// (`_s`, `_hz`, `_m`); unsuffixed columns are dimensionless.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Self {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}

/// Key scalars of a run, serialized in key order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary(pub BTreeMap<String, Value>);

impl Summary {
    pub fn new(scenario: &str) -> Self {
        let mut s = Self::default();
        s.set("schema_version", SCHEMA_VERSION);
        s.set("scenario", scenario);
        s
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.0.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.0).expect("summary serializes");
        s.push('\n');
        s
    }
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<(), CliError> {
    fs::write(path, table.to_csv()).map_err(|e| CliError::io(path, e))
}

pub fn emit_json(summary: &Summary, path: &Path) -> Result<(), CliError> {
    fs::write(path, summary.to_json()).map_err(|e| CliError::io(path, e))
}
