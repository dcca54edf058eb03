//! CSV and JSON-lines rendering.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};
use tapered_lp::{Error, Result};

use crate::settings::Settings;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "jsonl" | "jsonlines" => Ok(Self::Jsonl),
            _ => Err(Error::Usage(format!("--format={s} must be csv or jsonl"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map(Cell::Float).unwrap_or(Cell::Empty)
    }
}

/// Decimal with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format, header: &Settings) -> String {
        let mut out = String::new();
        match format {
            Format::Csv => {
                out.push_str(&header.header_lines());
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row
                        .iter()
                        .map(|c| match c {
                            Cell::Int(v) => v.to_string(),
                            Cell::Float(v) => fmt_f64(*v),
                            Cell::Text(s) => s.clone(),
                            Cell::Bool(b) => b.to_string(),
                            Cell::Empty => String::new(),
                        })
                        .collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
            Format::Jsonl => {
                out.push_str(&header.header_json().to_string());
                out.push('\n');
                for row in &self.rows {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(k, c)| {
                            let v = match c {
                                Cell::Int(v) => Value::from(*v),
                                Cell::Float(v) => {
                                    serde_json::Number::from_f64(*v).map(Value::Number).unwrap_or(Value::Null)
                                }
                                Cell::Text(s) => Value::String(s.clone()),
                                Cell::Bool(b) => Value::Bool(*b),
                                Cell::Empty => Value::Null,
                            };
                            (k.to_string(), v)
                        })
                        .collect();
                    out.push_str(&Value::Object(obj).to_string());
                    out.push('\n');
                }
            }
        }
        out
    }
}

/// Write to `path`, or to stdout when absent.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).and_then(|_| so.flush()).map_err(|e| Error::Usage(format!("stdout: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for &v in &[0.1, 1.0 / 3.0, 2f64.sqrt() * 1e-300, -7.25e12] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn csv_and_jsonl() {
        let mut t = Table::new(&["case_j", "value", "note"]);
        t.push(vec![Cell::Int(8), Cell::Float(0.5), Cell::Empty]);
        let mut h = Settings::default();
        h.set("j", 8);
        let csv = t.render(Format::Csv, &h);
        assert_eq!(csv, "# j=8\ncase_j,value,note\n8,5.0000000000000000e-1,\n");
        let js = t.render(Format::Jsonl, &h);
        let mut lines = js.lines();
        assert_eq!(lines.next().unwrap(), r#"{"config":{"j":"8"}}"#);
        let row: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
        assert_eq!(row["value"], 0.5);
        assert!(row["note"].is_null());
    }
}
