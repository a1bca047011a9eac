//! Tables and their serialisation. Data files carry no run metadata; that goes
//! to a `.meta.json` sidecar.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{Map, Number, Value};

use crate::config::Format;

/// Bumped whenever a column is added, removed, renamed or reordered.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Flag(bool),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Number(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Number)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&'static str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }
}

/// Rounds to `digits` significant digits and returns the shortest decimal
/// string that reads back to the rounded value, in exponent form outside
/// `1e-5 <= |x| < 1e16`.
pub fn format_number(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_significant(x, digits);
    if r == 0.0 || (1e-5..1e16).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

pub fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

fn cell_text(cell: &Cell, digits: usize) -> String {
    match cell {
        Cell::Number(x) => format_number(*x, digits),
        Cell::Flag(b) => b.to_string(),
        Cell::Text(t) => t.clone(),
        Cell::Missing => String::new(),
    }
}

fn cell_json(cell: &Cell, digits: usize) -> Value {
    match cell {
        Cell::Number(x) => Number::from_f64(round_significant(*x, digits)).map_or(Value::Null, Value::Number),
        Cell::Flag(b) => Value::Bool(*b),
        Cell::Text(t) => Value::String(t.clone()),
        Cell::Missing => Value::Null,
    }
}

pub fn csv_bytes(table: &Table, digits: usize) -> io::Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| cell_text(c, digits)))?;
    }
    w.into_inner().map_err(|e| io::Error::other(e.to_string()))
}

pub fn table_json(table: &Table, digits: usize) -> Value {
    let rows = table
        .rows
        .iter()
        .map(|row| {
            let mut m = Map::new();
            for (name, cell) in table.columns.iter().zip(row) {
                m.insert(name.to_string(), cell_json(cell, digits));
            }
            Value::Object(m)
        })
        .collect();
    Value::Array(rows)
}

/// Writes through `<path>.partial` and renames, so an interrupted run leaves
/// only the marker file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut partial = path.as_os_str().to_owned();
    partial.push(".partial");
    let partial = PathBuf::from(partial);
    fs::write(&partial, bytes)?;
    fs::rename(&partial, path)
}

/// `scan.csv` with suffix `flux` becomes `scan.flux.csv`.
pub fn companion_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{suffix}"),
    };
    path.with_file_name(name)
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".meta.json");
    PathBuf::from(p)
}

/// Everything a scenario produces: the main table, companion tables and a
/// JSON summary of scalar results.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub main: Table,
    pub companions: Vec<Table>,
    pub summary: Map<String, Value>,
    /// Optional gnuplot script, written next to the data; `{data}` is replaced
    /// by the data file name.
    pub plot_script: Option<String>,
}

/// Writes the artifacts and returns the data paths written.
pub fn emit(artifacts: &Artifacts, format: Format, path: &Path, digits: usize) -> io::Result<Vec<PathBuf>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut written = Vec::new();
    match format {
        Format::Csv => {
            write_atomic(path, &csv_bytes(&artifacts.main, digits)?)?;
            written.push(path.to_path_buf());
            for t in &artifacts.companions {
                let p = companion_path(path, &t.name);
                write_atomic(&p, &csv_bytes(t, digits)?)?;
                written.push(p);
            }
            if !artifacts.summary.is_empty() {
                let p = companion_path(path, "summary").with_extension("json");
                write_atomic(&p, &json_bytes(&Value::Object(rounded(&artifacts.summary, digits)))?)?;
                written.push(p);
            }
        }
        Format::Json => {
            let mut doc = Map::new();
            doc.insert(artifacts.main.name.clone(), table_json(&artifacts.main, digits));
            for t in &artifacts.companions {
                doc.insert(t.name.clone(), table_json(t, digits));
            }
            if !artifacts.summary.is_empty() {
                doc.insert("summary".into(), Value::Object(rounded(&artifacts.summary, digits)));
            }
            write_atomic(path, &json_bytes(&Value::Object(doc))?)?;
            written.push(path.to_path_buf());
        }
    }
    if let Some(script) = &artifacts.plot_script {
        let p = path.with_extension("gp");
        let data = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        write_atomic(&p, script.replace("{data}", &data).as_bytes())?;
        written.push(p);
    }
    Ok(written)
}

fn rounded(map: &Map<String, Value>, digits: usize) -> Map<String, Value> {
    map.iter().map(|(k, v)| (k.clone(), round_value(v, digits))).collect()
}

fn round_value(v: &Value, digits: usize) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| Number::from_f64(round_significant(x, digits)))
            .map_or(Value::Null, Value::Number),
        Value::Array(a) => Value::Array(a.iter().map(|x| round_value(x, digits)).collect()),
        Value::Object(m) => Value::Object(rounded(m, digits)),
        other => other.clone(),
    }
}

pub fn json_bytes(v: &Value) -> io::Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v).map_err(io::Error::other)?;
    bytes.push(b'\n');
    Ok(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_rounding() {
        assert_eq!(format_number(2.0, 12), "2");
        assert_eq!(format_number(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_number(-1.23456789012345e-20, 5), "-1.2346e-20");
        assert_eq!(format_number(0.0, 12), "0");
        assert_eq!(format_number(6.02214076e23, 12), "6.02214076e23");
        assert_eq!(format_number(1e-5, 3), "0.00001");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("t", &["a", "b", "c"]);
        t.push(vec![1.5.into(), true.into(), Cell::Missing]);
        let text = String::from_utf8(csv_bytes(&t, 12).unwrap()).unwrap();
        assert_eq!(text, "a,b,c\r\n1.5,true,\r\n");
    }

    #[test]
    fn companion_names() {
        assert_eq!(companion_path(Path::new("out/scan.csv"), "flux"), PathBuf::from("out/scan.flux.csv"));
        assert_eq!(sidecar_path(Path::new("scan.csv")), PathBuf::from("scan.csv.meta.json"));
    }

    #[test]
    fn json_has_no_nan() {
        let mut t = Table::new("t", &["x"]);
        t.push(vec![f64::NAN.into()]);
        assert_eq!(table_json(&t, 12)[0]["x"], Value::Null);
    }
}
