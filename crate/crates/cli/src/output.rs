//! Report rendering: versioned CSV and JSON, both deterministic. Every
//! numeric field is a rational string; no floats appear anywhere.

use std::io::Write;

use clap::ValueEnum;
use cutstack_core::Error;
use serde_json::{json, Value};

use crate::CommonArgs;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub struct Sink {
    format: Format,
    out: Box<dyn Write>,
}

impl Sink {
    pub fn open(common: &CommonArgs) -> Result<Self, Error> {
        let out: Box<dyn Write> = match &common.out {
            Some(path) => Box::new(std::fs::File::create(path).map_err(|e| {
                Error::Validation(format!("cannot create {}: {e}", path.display()))
            })?),
            None => Box::new(std::io::stdout()),
        };
        Ok(Sink { format: common.format, out })
    }

    /// Writes one report. `meta` keys and row cells are already strings;
    /// JSON objects use sorted keys, so both formats are byte-stable.
    pub fn report(&mut self, kind: &str, report: Report) -> Result<(), Error> {
        let text = match self.format {
            Format::Csv => render_csv(kind, &report),
            Format::Json => render_json(kind, &report),
        };
        self.out
            .write_all(text.as_bytes())
            .map_err(|e| Error::Validation(format!("write failed: {e}")))
    }
}

pub struct Report {
    pub meta: Vec<(&'static str, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Extra structured payload, included in JSON output only.
    pub extra: Option<Value>,
    /// Human-readable status lines, included in both formats.
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Report { meta: Vec::new(), columns, rows: Vec::new(), extra: None, notes: Vec::new() }
    }

    pub fn meta(mut self, key: &'static str, value: impl Into<String>) -> Self {
        self.meta.push((key, value.into()));
        self
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }
}

fn render_csv(kind: &str, r: &Report) -> String {
    let mut s = format!("# cutstack-csv v{FORMAT_VERSION} kind={kind}\n");
    for (k, v) in &r.meta {
        s.push_str(&format!("# {k}={v}\n"));
    }
    for n in &r.notes {
        s.push_str(&format!("# note: {n}\n"));
    }
    s.push_str(&r.columns.join(","));
    s.push('\n');
    for row in &r.rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn render_json(kind: &str, r: &Report) -> String {
    let meta: serde_json::Map<String, Value> = r
        .meta
        .iter()
        .map(|(k, v)| (k.to_string(), Value::String(v.clone())))
        .collect();
    let mut doc = json!({
        "version": FORMAT_VERSION,
        "kind": kind,
        "meta": meta,
        "columns": r.columns,
        "rows": r.rows,
        "notes": r.notes,
    });
    if let Some(extra) = &r.extra {
        doc["payload"] = extra.clone();
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    text
}
