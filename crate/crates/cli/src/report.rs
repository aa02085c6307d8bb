use std::collections::BTreeMap;

use serde_json::{json, Map, Number, Value};

use crate::args::Format;
use crate::CliError;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Shortest decimal text of the rounded value.
pub fn format_number(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        "0".to_string()
    } else {
        r.to_string()
    }
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect())
        }
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub inputs: BTreeMap<String, Value>,
    pub outputs: Value,
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub table: Option<Table>,
}

impl RunReport {
    pub fn to_json(&self) -> Value {
        let mut provenance = Map::new();
        provenance.insert("tool".into(), json!("qdeco"));
        provenance.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        provenance.insert("seed".into(), json!(self.seed));
        provenance.insert("tolerances".into(), json!(self.tolerances));
        let mut root = Map::new();
        root.insert("command".into(), json!(self.command));
        root.insert("inputs".into(), json!(self.inputs));
        root.insert("outputs".into(), self.outputs.clone());
        root.insert("provenance".into(), Value::Object(provenance));
        if let Some(t) = &self.table {
            root.insert(
                "table".into(),
                json!({ "header": t.header, "rows": t.rows }),
            );
        }
        round_value(Value::Object(root))
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json())
                    .map_err(|e| CliError::Io(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => match &self.table {
                Some(t) => {
                    let header: Vec<&str> = t.header.iter().map(String::as_str).collect();
                    emit_sweep(&t.rows, &header, Format::Csv)
                }
                None => {
                    let mut flat = Vec::new();
                    flatten("", &round_value(self.outputs.clone()), &mut flat);
                    let (names, values): (Vec<String>, Vec<String>) = flat.into_iter().unzip();
                    write_csv(&[names, values])
                }
            },
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&join(k), v, out)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&join(&i.to_string()), v, out)),
        Value::Number(n) => out.push((
            prefix.to_string(),
            match n.as_f64() {
                Some(x) if n.is_f64() => format_number(x),
                _ => n.to_string(),
            },
        )),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        Value::Null => out.push((prefix.to_string(), String::new())),
    }
}

fn write_csv(records: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in records {
        w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

/// Numeric rows as CSV (header first) or a JSON array of objects, floats at
/// 12 significant digits, newline-terminated.
pub fn emit_sweep(rows: &[Vec<f64>], header: &[&str], format: Format) -> Result<String, CliError> {
    if let Some((row, r)) = rows
        .iter()
        .enumerate()
        .find(|(_, r)| r.len() != header.len())
    {
        return Err(CliError::RaggedRows {
            row,
            expected: header.len(),
            found: r.len(),
        });
    }
    match format {
        Format::Csv => {
            let mut records = vec![header.iter().map(|h| h.to_string()).collect::<Vec<_>>()];
            records.extend(
                rows.iter()
                    .map(|r| r.iter().map(|&x| format_number(x)).collect()),
            );
            write_csv(&records)
        }
        Format::Json => {
            let objects: Vec<Value> = rows
                .iter()
                .map(|r| {
                    Value::Object(
                        header
                            .iter()
                            .zip(r)
                            .map(|(h, &x)| (h.to_string(), json!(x)))
                            .collect(),
                    )
                })
                .collect();
            let mut s = serde_json::to_string(&round_value(Value::Array(objects)))
                .map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
    }
}
