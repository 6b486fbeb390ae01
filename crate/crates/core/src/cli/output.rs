//! JSON, CSV and plain-text rendering of command results.

use std::io::Write;

use num_traits::Zero;
use serde_json::{json, Map, Value};

use crate::clt::NormalizedMoment;
use crate::error::Error;
use crate::opvalued::BScalar;
use crate::scalar::{rational_to_f64, Scalar};

use super::SCHEMA_VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub rows: Vec<Map<String, Value>>,
    pub timings: Map<String, Value>,
    /// Set by `verify` when a check fails.
    pub failed: bool,
}

impl Report {
    pub fn new(command: &str, inputs: Value) -> Self {
        Report { command: command.to_string(), inputs, rows: Vec::new(), timings: Map::new(), failed: false }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "inputs": self.inputs,
            "results": self.rows,
            "timings": self.timings,
        })
    }

    /// Column names in order of first appearance.
    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = Vec::new();
        for r in &self.rows {
            for k in r.keys() {
                if !cols.contains(k) {
                    cols.push(k.clone());
                }
            }
        }
        cols
    }
}

pub fn error_document(e: &Error) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "error": { "kind": e.kind(), "message": e.to_string() },
    })
}

/// A real value as a number, a complex one as `[re, im]`.
pub fn approx_value(re: f64, im: f64) -> Value {
    if im == 0.0 {
        json!(re)
    } else {
        json!([re, im])
    }
}

fn scalar_approx(s: &Scalar, inv_sqrt: Option<u64>) -> Value {
    let (re, im) = s.to_f64_pair();
    let f = inv_sqrt.map_or(1.0, |n| 1.0 / (n as f64).sqrt());
    if s.is_real() {
        json!(rational_to_f64(&s.re) * f)
    } else {
        approx_value(re * f, im * f)
    }
}

pub fn scalar_fields(prefix: &str, s: &Scalar) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert(format!("{prefix}exact"), json!(s.to_string()));
    m.insert(format!("{prefix}approx"), scalar_approx(s, None));
    m
}

pub fn moment_fields(prefix: &str, v: &NormalizedMoment) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert(format!("{prefix}exact"), json!(v.to_string()));
    m.insert(format!("{prefix}approx"), scalar_approx(&v.coefficient, v.inv_sqrt));
    m
}

fn with_inv_sqrt(s: &Scalar, inv_sqrt: Option<u64>) -> String {
    NormalizedMoment { coefficient: s.clone(), inv_sqrt: inv_sqrt.filter(|_| !s.is_zero()) }.to_string()
}

pub fn bscalar_exact(b: &BScalar, inv_sqrt: Option<u64>) -> Value {
    json!(b
        .rows()
        .iter()
        .map(|r| r.iter().map(|x| with_inv_sqrt(x, inv_sqrt)).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

pub fn bscalar_approx(b: &BScalar, inv_sqrt: Option<u64>) -> Value {
    json!(b
        .rows()
        .iter()
        .map(|r| r.iter().map(|x| scalar_approx(x, inv_sqrt)).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

fn write_csv(report: &Report, out: &mut dyn Write) -> std::io::Result<()> {
    let cols = report.columns();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&cols)?;
    for r in &report.rows {
        w.write_record(cols.iter().map(|c| cell(r.get(c))))?;
    }
    w.flush()
}

fn write_text(report: &Report, out: &mut dyn Write) -> std::io::Result<()> {
    let cols = report.columns();
    let cells: Vec<Vec<String>> =
        report.rows.iter().map(|r| cols.iter().map(|c| cell(r.get(c))).collect()).collect();
    let widths: Vec<usize> = cols
        .iter()
        .enumerate()
        .map(|(i, c)| cells.iter().map(|r| r[i].chars().count()).chain([c.len()]).max().unwrap_or(0))
        .collect();
    let line = |items: &[String]| {
        let padded: Vec<String> = items
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    writeln!(out, "{}", line(&cols))?;
    for r in &cells {
        writeln!(out, "{}", line(r))?;
    }
    for (k, v) in &report.timings {
        writeln!(out, "{k}: {v}")?;
    }
    Ok(())
}

pub fn write(report: &Report, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &report.to_json())?;
            writeln!(out)
        }
        Format::Csv => write_csv(report, out),
        Format::Text => write_text(report, out),
    }
}
