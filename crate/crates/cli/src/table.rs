//! Tabular output in CSV or JSON.
//!
//! CSV: `#` comment lines with the command, the parameter echo, extra
//! fields and units, then a header row. JSON: one object
//! `{params, columns, rows, ...extras}`. Numbers are rounded to the
//! configured significant digits, so output is byte-stable.

use serde_json::{Map, Value};

use crate::config::{Format, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, Copy)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
}

pub const fn col(name: &'static str, unit: &'static str) -> Column {
    Column { name, unit }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    /// Summary fields, e.g. extrema of a curve.
    pub extras: Map<String, Value>,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
            extras: Map::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, cfg: &RunConfig) -> Result<String, CliError> {
        let digits = cfg.output.precision;
        match cfg.output.format {
            Format::Csv => self.csv(cfg, digits),
            Format::Json => Ok(self.json(cfg, digits)),
        }
    }

    fn csv(&self, cfg: &RunConfig, digits: usize) -> Result<String, CliError> {
        let mut out = String::new();
        out.push_str(&format!("# zeno {}\n", command_name(cfg)));
        out.push_str(&format!("# params: {}\n", cfg.to_json()));
        for (k, v) in &self.extras {
            match round_value(v, digits) {
                Value::String(s) => out.push_str(&format!("# {k}: {s}\n")),
                other => out.push_str(&format!("# {k}: {other}\n")),
            }
        }
        let units: Vec<String> = self
            .columns
            .iter()
            .map(|c| format!("{} [{}]", c.name, c.unit))
            .collect();
        out.push_str(&format!("# units: {}\n", units.join(", ")));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name))?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| match c {
                Cell::Num(x) => fmt_sig(*x, digits),
                Cell::Text(s) => s.clone(),
                Cell::Bool(b) => b.to_string(),
                Cell::Empty => String::new(),
            }))?;
        }
        let body = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        out.push_str(std::str::from_utf8(&body).expect("csv output is utf-8"));
        Ok(out)
    }

    fn json(&self, cfg: &RunConfig, digits: usize) -> String {
        let mut obj = Map::new();
        obj.insert(
            "params".into(),
            serde_json::to_value(cfg).expect("run config serializes"),
        );
        let columns = self
            .columns
            .iter()
            .map(|c| serde_json::json!({"name": c.name, "unit": c.unit}))
            .collect();
        obj.insert("columns".into(), Value::Array(columns));
        let rows = self
            .rows
            .iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|c| match c {
                            Cell::Num(x) => num(*x, digits),
                            Cell::Text(s) => Value::String(s.clone()),
                            Cell::Bool(b) => Value::Bool(*b),
                            Cell::Empty => Value::Null,
                        })
                        .collect(),
                )
            })
            .collect();
        obj.insert("rows".into(), Value::Array(rows));
        for (k, v) in &self.extras {
            obj.insert(k.clone(), round_value(v, digits));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("json serializes");
        s.push('\n');
        s
    }
}

fn command_name(cfg: &RunConfig) -> String {
    serde_json::to_value(cfg.command)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

/// x rounded to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .expect("formatted float parses")
}

/// Shortest text for the rounded value; exponent form outside [1e-4, 1e9).
pub fn fmt_sig(x: f64, digits: usize) -> String {
    let r = round_sig(x, digits);
    if r == 0.0 {
        "0".into()
    } else if !r.is_finite() || (1e-4..1e9).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn num(x: f64, digits: usize) -> Value {
    serde_json::Number::from_f64(round_sig(x, digits)).map_or(Value::Null, Value::Number)
}

fn round_value(v: &Value, digits: usize) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => n.as_f64().map_or(Value::Null, |x| num(x, digits)),
        Value::Array(a) => Value::Array(a.iter().map(|x| round_value(x, digits)).collect()),
        Value::Object(o) => Value::Object(o.iter().map(|(k, x)| (k.clone(), round_value(x, digits))).collect()),
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.0461512912345, 9), "0.0461512912");
        assert_eq!(fmt_sig(2.0, 9), "2");
        assert_eq!(fmt_sig(-1.23456789012e-7, 9), "-1.23456789e-7");
        assert_eq!(fmt_sig(123456789012.0, 3), "1.23e11");
        assert_eq!(fmt_sig(0.0, 9), "0");
        assert_eq!(round_sig(1.0 / 3.0, 4), 0.3333);
    }

    #[test]
    fn rounding_is_idempotent() {
        for &x in &[1.0 / 7.0, 2.5e-9, 123.456789123, -9.87654321e12] {
            let r = round_sig(x, 9);
            assert_eq!(round_sig(r, 9), r);
            assert_eq!(fmt_sig(r, 9).parse::<f64>().unwrap(), r);
        }
    }
}
