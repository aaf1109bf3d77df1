//! CSV and JSON writers. Every float is written with 17 significant digits,
//! which round-trips an f64 exactly.

use crate::error::CliError;
use serde::Serialize;
use serde_json::ser::Formatter;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

pub fn float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Emit(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Emit(e.to_string()))
    }
}

/// serde_json formatter writing floats as `{:.16e}`; non-finite floats
/// become `null` before reaching it.
struct Digits17;

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn json_string<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| CliError::Emit(e.to_string()))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io { path, source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn floats_round_trip_through_json() {
        let values = vec![0.1, 1.0 / 3.0, -2.718281828459045e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0, -0.0, 123456789.123456789];
        let text = json_string(&values).unwrap();
        let back: Value = serde_json::from_str(&text).unwrap();
        for (v, b) in values.iter().zip(back.as_array().unwrap()) {
            assert_eq!(v.to_bits(), b.as_f64().unwrap().to_bits(), "{v}");
        }
        assert_eq!(json_string(&f64::NAN).unwrap().trim(), "null");
    }

    #[test]
    fn csv_cells() {
        let mut t = Table::new(&["a", "b", "c"]);
        assert_eq!(t.to_csv().unwrap(), "a,b,c\n");
        t.push(vec![0.3.into(), Cell::Empty, "N11[1,2]".into()]);
        assert_eq!(t.to_csv().unwrap(), "a,b,c\n2.9999999999999999e-1,,\"N11[1,2]\"\n");
        assert_eq!(float(-0.6), "-5.9999999999999998e-1");
    }
}
