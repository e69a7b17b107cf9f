//! Report rendering: JSON documents and CSV tables.

use std::io::Write;

use boolvol_core::MCEstimate;
use serde_json::{json, Value};

pub struct Report {
    pub json: Value,
    pub table: Table,
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn row(mut self, cells: Vec<String>) -> Self {
        self.rows.push(cells);
        self
    }

    pub fn push(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }
}

/// The stable fields of a stochastic result.
pub fn estimate_fields(e: &MCEstimate, method: &str) -> serde_json::Map<String, Value> {
    let mut map = serde_json::Map::new();
    map.insert("value".into(), json!(e.value));
    map.insert("stderr".into(), json!(e.stderr));
    map.insert("samples".into(), json!(e.samples));
    map.insert("seed".into(), json!(e.seed));
    map.insert("method".into(), json!(method));
    map
}

pub fn estimate_json(e: &MCEstimate) -> Value {
    json!({"value": e.value, "stderr": e.stderr, "samples": e.samples})
}

pub fn estimate_row(e: &MCEstimate, method: &str) -> Vec<String> {
    vec![
        e.value.to_string(),
        e.stderr.to_string(),
        e.samples.to_string(),
        e.seed.to_string(),
        method.to_string(),
    ]
}

pub fn write(report: &Report, csv: bool, out: impl Write) -> std::io::Result<()> {
    if csv {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&report.table.header)?;
        for row in &report.table.rows {
            w.write_record(row)?;
        }
        w.flush()
    } else {
        let mut out = out;
        serde_json::to_writer_pretty(&mut out, &report.json)?;
        writeln!(out)
    }
}
