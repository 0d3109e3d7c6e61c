//! CSV and JSON writers. Both carry a provenance block: tool version,
//! experiment and the resolved settings.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Format, Resolved};

pub struct Report {
    pub experiment: &'static str,
    pub rows: Vec<Value>,
    /// Summaries and fits; top-level keys in JSON, `#` lines in CSV.
    pub extra: Map<String, Value>,
    /// Rows or levels whose computation failed, with the reason.
    pub failures: Vec<Value>,
}

impl Report {
    pub fn new(experiment: &'static str) -> Self {
        Self {
            experiment,
            rows: Vec::new(),
            extra: Map::new(),
            failures: Vec::new(),
        }
    }

    pub fn push(&mut self, row: impl Serialize) {
        self.rows.push(serde_json::to_value(row).expect("rows serialize"));
    }

    pub fn fail(&mut self, what: impl Serialize, error: &sparselab::LabError) {
        self.failures.push(json!({ "at": what, "error": error.to_string() }));
    }

    pub fn extra(&mut self, key: &str, value: impl Serialize) {
        self.extra
            .insert(key.to_string(), serde_json::to_value(value).expect("extras serialize"));
    }
}

fn provenance(report: &Report, settings: &Resolved) -> Value {
    json!({
        "tool": "sparselab",
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": report.experiment,
        "settings": settings,
    })
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        other => other.to_string().replace(',', ";"),
    }
}

fn columns(rows: &[Value]) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    for row in rows {
        if let Value::Object(map) = row {
            for key in map.keys() {
                if !cols.contains(key) {
                    cols.push(key.clone());
                }
            }
        }
    }
    cols
}

pub fn render(report: &Report, settings: &Resolved) -> String {
    match settings.format {
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("provenance".into(), provenance(report, settings));
            doc.insert("rows".into(), Value::Array(report.rows.clone()));
            for (k, v) in &report.extra {
                doc.insert(k.clone(), v.clone());
            }
            if !report.failures.is_empty() {
                doc.insert("failures".into(), Value::Array(report.failures.clone()));
            }
            let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::new();
            s.push_str(&format!("# sparselab {}\n", env!("CARGO_PKG_VERSION")));
            s.push_str(&format!("# experiment: {}\n", report.experiment));
            s.push_str(&format!(
                "# settings: {}\n",
                serde_json::to_string(settings).expect("settings serialize")
            ));
            for (k, v) in &report.extra {
                s.push_str(&format!("# {k}: {v}\n"));
            }
            for f in &report.failures {
                s.push_str(&format!("# failure: {f}\n"));
            }
            let cols = columns(&report.rows);
            s.push_str(&cols.join(","));
            s.push('\n');
            for row in &report.rows {
                let line: Vec<String> = cols.iter().map(|c| cell(row.get(c).unwrap_or(&Value::Null))).collect();
                s.push_str(&line.join(","));
                s.push('\n');
            }
            s
        }
    }
}

pub fn emit(report: &Report, settings: &Resolved) -> std::io::Result<()> {
    let text = render(report, settings);
    match &settings.out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}
