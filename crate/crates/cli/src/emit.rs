use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::Value;

use crate::Format;

/// A finished command: what to print and how to exit.
pub struct Output {
    pub value: Value,
    /// Replaces the flattened CSV/text rendering for tabular commands.
    pub table: Option<Table>,
    /// Replaces every other text rendering.
    pub text: Option<String>,
    pub exit: u8,
}

pub struct Table {
    /// Leading `#` line carrying the version and seed.
    pub preamble: String,
    pub csv: String,
}

impl Output {
    pub fn new(value: Value, exit: u8) -> Self {
        Self {
            value,
            table: None,
            text: None,
            exit,
        }
    }

    pub fn render(&self, format: Format) -> String {
        if let (Format::Text, Some(t)) = (format, &self.text) {
            return t.clone();
        }
        match (format, &self.table) {
            (Format::Json, _) => {
                let mut s = serde_json::to_string_pretty(&self.value).expect("JSON value");
                s.push('\n');
                s
            }
            (Format::Csv, Some(t)) => format!("{}\n{}", t.preamble, t.csv),
            (Format::Text, Some(t)) => format!("{}\n{}", t.preamble, aligned(&t.csv)),
            (Format::Csv, None) => {
                let fields = flatten(&self.value);
                let header: Vec<String> = fields.iter().map(|(k, _)| csv_cell(k)).collect();
                let row: Vec<String> = fields.iter().map(|(_, v)| csv_cell(v)).collect();
                format!("{}\n{}\n", header.join(","), row.join(","))
            }
            (Format::Text, None) => flatten(&self.value)
                .into_iter()
                .map(|(k, v)| format!("{k}: {v}\n"))
                .collect(),
        }
    }
}

/// Dotted-key leaves of a JSON value, in document order. Arrays of scalars
/// are joined with `;`.
pub fn flatten(value: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    walk("", value, &mut out);
    out
}

fn walk(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                walk(&key, v, out);
            }
        }
        Value::Array(items) if items.iter().all(|v| !v.is_object() && !v.is_array()) => {
            let joined: Vec<String> = items.iter().map(scalar).collect();
            out.push((prefix.to_string(), joined.join(";")));
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                walk(&format!("{prefix}.{i}"), v, out);
            }
        }
        v => out.push((prefix.to_string(), scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn aligned(csv: &str) -> String {
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.len())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in rows {
        let cells: Vec<String> = r
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s:>w$}"))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub fn write_out(path: &Path, text: &str) -> io::Result<()> {
    if path.as_os_str() == "-" {
        let mut stdout = io::stdout().lock();
        stdout.write_all(text.as_bytes())?;
        stdout.flush()
    } else {
        fs::write(path, text)
    }
}
