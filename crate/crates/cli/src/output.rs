use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use num_bigint::BigUint;
use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Where and how a command writes its result table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputSpec {
    pub format: Format,
    /// Standard output when `None`.
    pub path: Option<PathBuf>,
    /// Significant decimal digits, 1 to 17.
    pub precision: u8,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            format: Format::Csv,
            path: None,
            precision: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Big(BigUint),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u8> for Cell {
    fn from(v: u8) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<BigUint> for Cell {
    fn from(v: BigUint) -> Self {
        Cell::Big(v)
    }
}

/// Named columns and rows of cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// `x` rounded to `precision` significant digits.
pub fn round_sig(x: f64, precision: u8) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    let digits = precision.clamp(1, 17) as usize - 1;
    format!("{x:.digits$e}").parse().unwrap_or(x)
}

/// Shortest decimal string that parses back to `round_sig(x, precision)`.
pub fn format_number(x: f64, precision: u8) -> String {
    let r = round_sig(x, precision);
    if r.is_nan() {
        "NaN".into()
    } else if r.is_infinite() {
        if r > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        Number::from_f64(r).map_or_else(|| r.to_string(), |n| n.to_string())
    }
}

struct CsvText<'a>(&'a Cell, u8);

impl fmt::Display for CsvText<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Cell::Num(x) => f.write_str(&format_number(*x, self.1)),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Big(b) => write!(f, "{b}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

fn json_cell(cell: &Cell, precision: u8) -> Value {
    match cell {
        Cell::Num(x) => Number::from_f64(round_sig(*x, precision)).map_or(Value::Null, Value::Number),
        Cell::Int(i) => Value::from(*i),
        Cell::Big(b) => match u64::try_from(b) {
            Ok(v) => Value::from(v),
            // beyond 64 bits counts travel as decimal strings
            Err(_) => Value::String(b.to_string()),
        },
        Cell::Text(s) => Value::String(s.clone()),
    }
}

pub fn render(table: &Table, spec: &OutputSpec) -> String {
    match spec.format {
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = table
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.to_string(), json_cell(v, spec.precision)))
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&Value::Array(rows)).expect("json values serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&table.columns).expect("write to memory");
            for row in &table.rows {
                w.write_record(row.iter().map(|c| CsvText(c, spec.precision).to_string()))
                    .expect("write to memory");
            }
            String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 csv")
        }
    }
}

pub fn emit(text: &str, spec: &OutputSpec, stdout: &mut dyn Write) -> std::io::Result<()> {
    match &spec.path {
        Some(p) => std::fs::write(p, text),
        None => stdout.write_all(text.as_bytes()),
    }
}
