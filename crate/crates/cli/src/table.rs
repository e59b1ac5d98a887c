//! Column-ordered tables written as CSV with a JSON twin.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    /// Numbers carry 17 significant digits so they round-trip exactly.
    pub fn to_csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Num(x) if x.is_nan() => "nan".into(),
            Cell::Num(x) => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    /// Non-finite numbers become their CSV spelling, since JSON has no literal for them.
    pub fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) => Value::String(self.to_csv()),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    /// Numeric column by name, skipping non-numeric cells.
    pub fn column(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.columns.iter().position(|c| *c == name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter_map(|r| match r[i] {
                Cell::Num(x) => Some(x),
                Cell::Int(n) => Some(n as f64),
                _ => None,
            })
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)
            .map_err(|e| CliError::io(path, e))?;
        w.write_record(&self.columns).map_err(|e| CliError::io(path, e))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv)).map_err(|e| CliError::io(path, e))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
            .collect();
        json!({ "columns": self.columns, "rows": rows })
    }

    pub fn write_json(&self, path: &Path) -> Result<(), CliError> {
        write_json(path, &self.to_json())
    }
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    let mut f = File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0 - 2f64.sqrt(), 1e-300, 123456789.12345679] {
            let s = Cell::Num(x).to_csv();
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(Cell::Num(f64::INFINITY).to_csv(), "inf");
        assert_eq!(Cell::from(None::<f64>).to_csv(), "");
    }

    #[test]
    fn json_twin_keeps_column_order() {
        let mut t = Table::new(&["b", "a"]);
        t.push(vec![1.5.into(), "x".into()]);
        let v = t.to_json();
        assert_eq!(v["columns"], json!(["b", "a"]));
        assert_eq!(v["rows"][0], json!([1.5, "x"]));
        assert_eq!(t.column("b"), vec![1.5]);
    }
}
