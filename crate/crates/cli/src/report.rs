//! Report documents and their CSV form.
//!
//! A report is a JSON object with a fixed header (`format_version`, `tool`,
//! `version`, `command`, `source`, `seed`, `tolerances`, `pass`) followed by
//! command-specific sections. Objects are serialized with sorted keys and
//! nothing run-dependent (time, host, thread count) is recorded, so equal
//! inputs give equal bytes.
//!
//! The CSV form has one row per scalar leaf, with columns `path,index,value`.
//! The innermost array index on the way to a leaf goes to `index`, so a
//! per-trial series reads as one `path` with `index` 0, 1, 2, …

use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;
use crate::error::CliError;

pub const FORMAT_VERSION: u64 = 1;
pub const TOOL: &str = "rankcomplex";

#[derive(Debug, Clone)]
pub struct Report {
    fields: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str, source: &str, seed: Option<u64>) -> Self {
        let mut fields = Map::new();
        fields.insert("format_version".into(), FORMAT_VERSION.into());
        fields.insert("tool".into(), TOOL.into());
        fields.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        fields.insert("command".into(), command.into());
        fields.insert("source".into(), source.into());
        fields.insert("seed".into(), seed.map_or(Value::Null, Value::from));
        fields.insert("tolerances".into(), Value::Object(Map::new()));
        Self { fields }
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        if let Some(Value::Object(t)) = self.fields.get_mut("tolerances") {
            t.insert(name.into(), value.into());
        }
    }

    pub fn section<T: Serialize>(&mut self, name: &str, value: &T) {
        let v = serde_json::to_value(value).expect("report sections serialize");
        self.fields.insert(name.into(), v);
    }

    pub fn set_pass(&mut self, pass: bool) {
        self.fields.insert("pass".into(), pass.into());
    }

    pub fn value(&self) -> Value {
        Value::Object(self.fields.clone())
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        let v = self.value();
        match format {
            Format::Json => Ok(to_json(&v)),
            Format::Csv => to_csv(&v),
        }
    }
}

pub fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(v: &Value, path: &mut String, index: Option<usize>, rows: &mut Vec<(String, Option<usize>, String)>) {
    match v {
        Value::Object(m) => {
            for (k, child) in m {
                let len = path.len();
                if !path.is_empty() {
                    path.push('.');
                }
                path.push_str(k);
                flatten(child, path, index, rows);
                path.truncate(len);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                let len = path.len();
                // An outer index stays in the path once a deeper array takes over.
                match child {
                    Value::Array(_) | Value::Object(_) if contains_array(child) => {
                        path.push_str(&format!("[{i}]"));
                        flatten(child, path, None, rows);
                    }
                    _ => flatten(child, path, Some(i), rows),
                }
                path.truncate(len);
            }
        }
        leaf => rows.push((path.clone(), index, scalar(leaf))),
    }
}

fn contains_array(v: &Value) -> bool {
    match v {
        Value::Array(_) => true,
        Value::Object(m) => m.values().any(contains_array),
        _ => false,
    }
}

pub fn to_csv(v: &Value) -> Result<String, CliError> {
    let mut rows = Vec::new();
    flatten(v, &mut String::new(), None, &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::input(format!("cannot write CSV: {e}"));
    w.write_record(["path", "index", "value"]).map_err(io)?;
    for (path, index, value) in rows {
        let index = index.map(|i| i.to_string()).unwrap_or_default();
        w.write_record([path.as_str(), index.as_str(), value.as_str()]).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::input(format!("cannot write CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields is UTF-8"))
}

/// Reads a JSON report and checks its header.
pub fn load(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| {
        CliError::input(format!(
            "{}: malformed report at line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    if v.get("format_version").and_then(Value::as_u64) != Some(FORMAT_VERSION) {
        return Err(CliError::input(format!("{}: format_version: expected {FORMAT_VERSION}", path.display())));
    }
    if v.get("tool").and_then(Value::as_str) != Some(TOOL) {
        return Err(CliError::input(format!("{}: tool: expected {TOOL:?}", path.display())));
    }
    Ok(v)
}

pub fn write(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(CliError::input(format!("cannot write to stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}
