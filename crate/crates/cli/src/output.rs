use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use jackratio::rational::format_rational;
use jackratio::{Partition, Rational};
use serde_json::{Map, Value};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Exact expansions: a JSON object `"partition" -> "p/q"` or a two-column
/// CSV.
pub fn symbolic(format: Format, key: &str, terms: &BTreeMap<Partition, Rational>) -> String {
    match format {
        Format::Json => {
            let map: Map<String, Value> = terms
                .iter()
                .rev()
                .map(|(p, c)| (p.to_csv(), Value::String(format_rational(c))))
                .collect();
            let mut s = serde_json::to_string(&map).unwrap();
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = format!("{key},coefficient\n");
            for (p, c) in terms.iter().rev() {
                s.push_str(&format!("\"{}\",{}\n", p.to_csv(), format_rational(c)));
            }
            s
        }
    }
}

/// `v` rounded to `digits` significant digits.
pub fn number(v: f64, digits: u32) -> Value {
    if !v.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1) as usize, v).parse().unwrap();
    Value::from(rounded)
}

pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(headers: &[S]) -> Self {
        Table {
            headers: headers.iter().map(|h| h.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

pub struct Envelope {
    command: String,
    params: Value,
    table: Table,
    pub metadata: Map<String, Value>,
    pub warnings: Vec<String>,
}

impl Envelope {
    pub fn new(command: String, params: Value, table: Table) -> Self {
        let mut metadata = Map::new();
        metadata.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
        Envelope {
            command,
            params,
            table,
            metadata,
            warnings: Vec::new(),
        }
    }

    pub fn render(mut self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut s = self.table.headers.join(",");
                s.push('\n');
                for row in &self.table.rows {
                    let cells: Vec<String> = row.iter().map(cell).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .table
                    .rows
                    .iter()
                    .map(|row| {
                        Value::Object(self.table.headers.iter().cloned().zip(row.iter().cloned()).collect())
                    })
                    .collect();
                self.metadata.insert(
                    "warnings".into(),
                    Value::Array(self.warnings.drain(..).map(Value::String).collect()),
                );
                let mut envelope = Map::new();
                envelope.insert("command".into(), Value::String(self.command));
                envelope.insert("params".into(), self.params);
                envelope.insert("columns".into(), Value::from(self.table.headers.clone()));
                envelope.insert("rows".into(), Value::Array(rows));
                envelope.insert("metadata".into(), Value::Object(self.metadata));
                let mut s = serde_json::to_string_pretty(&Value::Object(envelope)).unwrap();
                s.push('\n');
                s
            }
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "NaN".into(),
        other => other.to_string(),
    }
}

pub fn write(path: Option<&Path>, text: &str) -> Result<(), jackratio::Error> {
    let io = |e: std::io::Error| jackratio::Error::Io(e.to_string());
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| jackratio::Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(io)?;
            out.flush().map_err(io)
        }
    }
}
