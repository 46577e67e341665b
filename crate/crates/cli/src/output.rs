//! Deterministic report emission: sorted JSON keys, 12 significant digits,
//! non-finite values as the strings `inf`, `-inf`, `nan`.

use std::io::Write;

use serde_json::{Map, Value};

use crate::config::{Format, RunConfig};
use crate::error::CliError;

pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

pub fn num(x: f64) -> Value {
    if x.is_nan() {
        Value::String("nan".into())
    } else if x.is_infinite() {
        Value::String(if x > 0.0 { "inf" } else { "-inf" }.into())
    } else {
        Value::from(round12(x))
    }
}

/// CSV text for a float.
pub fn cell(x: f64) -> String {
    match num(x) {
        Value::String(s) => s,
        Value::Number(_) => format!("{:?}", round12(x)),
        _ => unreachable!(),
    }
}

/// One table plus extra top-level JSON fields.
pub struct Report {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub extra: Map<String, Value>,
}

impl Report {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
            extra: Map::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, config: &RunConfig) -> Result<Vec<u8>, CliError> {
        let hash = config.hash();
        match config.format {
            Format::Json => {
                let results: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Object(self.header.iter().map(|h| h.to_string()).zip(r.iter().cloned()).collect()))
                    .collect();
                let mut top = self.extra.clone();
                top.insert("command".into(), Value::from(config.command.clone()));
                top.insert("config_hash".into(), Value::from(hash));
                top.insert("seed".into(), Value::from(config.seed));
                top.insert("results".into(), Value::Array(results));
                let mut out = serde_json::to_vec_pretty(&Value::Object(top)).expect("json serializes");
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let mut header: Vec<&str> = self.header.clone();
                header.extend(["config_hash", "seed"]);
                w.write_record(&header).map_err(csv_err)?;
                for r in &self.rows {
                    let mut fields: Vec<String> = r.iter().map(text).collect();
                    fields.push(hash.clone());
                    fields.push(config.seed.to_string());
                    w.write_record(&fields).map_err(csv_err)?;
                }
                w.into_inner().map_err(|e| CliError::Io(e.into_error()))
            }
        }
    }

    pub fn emit(&self, config: &RunConfig) -> Result<(), CliError> {
        let bytes = self.render(config)?;
        match &config.out {
            Some(path) => std::fs::write(path, bytes)?,
            None => std::io::stdout().lock().write_all(&bytes)?,
        }
        Ok(())
    }
}

fn text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => cell(f),
            _ => n.to_string(),
        },
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e.to_string()))
}
