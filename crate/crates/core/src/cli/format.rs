//! Text emission: lowercase scientific floats, CSV tables and JSON documents
//! whose keys mirror the CSV columns.

use super::config::Format;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(usize),
    Float(f64),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Float)
    }
}

/// `precision` digits after the point, e.g. 8.740320488976e-1. Negative zero
/// prints as zero.
pub fn format_float(x: f64, precision: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.precision$e}")
}

fn cell_text(cell: &Cell, precision: usize) -> String {
    match cell {
        Cell::Int(i) => i.to_string(),
        Cell::Float(x) => format_float(*x, precision),
        Cell::Text(s) => s.clone(),
        Cell::Missing => String::new(),
    }
}

/// JSON literal; non-finite floats become null. The float text is the same
/// as in CSV, which is a valid JSON number.
fn cell_json(cell: &Cell, precision: usize) -> String {
    match cell {
        Cell::Int(i) => i.to_string(),
        Cell::Float(x) if x.is_finite() => format_float(*x, precision),
        Cell::Float(_) | Cell::Missing => "null".into(),
        Cell::Text(s) => json_string(s),
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// Rows under a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self { columns: columns.iter().map(|c| c.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn to_csv(&self, precision: usize) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| cell_text(c, precision))).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    fn row_object(&self, row: &[Cell], precision: usize, indent: &str) -> String {
        let fields: Vec<String> = self
            .columns
            .iter()
            .zip(row)
            .map(|(name, cell)| format!("{indent}  {}: {}", json_string(name), cell_json(cell, precision)))
            .collect();
        format!("{{\n{}\n{indent}}}", fields.join(",\n"))
    }

    /// Array of row objects, one key per column.
    pub fn to_json(&self, precision: usize) -> String {
        if self.rows.is_empty() {
            return "[]\n".into();
        }
        let rows: Vec<String> = self.rows.iter().map(|r| format!("  {}", self.row_object(r, precision, "  "))).collect();
        format!("[\n{}\n]\n", rows.join(",\n"))
    }

    /// The single row as one object.
    pub fn to_json_record(&self, precision: usize) -> String {
        assert_eq!(self.rows.len(), 1, "record output needs exactly one row");
        format!("{}\n", self.row_object(&self.rows[0], precision, ""))
    }

    pub fn render(&self, format: Format, precision: usize, record: bool) -> String {
        match (format, record) {
            (Format::Csv, _) => self.to_csv(precision),
            (Format::Json, true) => self.to_json_record(precision),
            (Format::Json, false) => self.to_json(precision),
        }
    }
}
