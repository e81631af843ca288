//! CSV and JSON rendering of run outputs.
//!
//! Both formats carry the same content: a metadata block (resolved configuration, then result
//! fields), column names, and rows. Floats are written with 12 significant digits.

use serde_json::{Map, Value as Json};
use toml::{Table, Value};

use crate::config::{Format, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Num)
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

/// Result fields written to the metadata block.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Meta(Vec<(String, Cell)>);

impl Meta {
    pub fn push(&mut self, key: &str, value: impl Into<Cell>) {
        self.0.push((key.to_string(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&Cell> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub meta: Meta,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Output {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            meta: Meta::default(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Num(x) => format_float(*x),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
        Cell::Missing => String::new(),
    }
}

fn meta_value(c: &Cell) -> Value {
    match c {
        Cell::Num(x) => Value::String(format_float(*x)),
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Missing => Value::String(String::new()),
    }
}

/// Rounds through the 12-digit text form so both formats carry identical numbers.
fn json_cell(c: &Cell) -> Json {
    match c {
        Cell::Num(x) => format_float(*x)
            .parse::<f64>()
            .ok()
            .and_then(serde_json::Number::from_f64)
            .map_or(Json::Null, Json::Number),
        Cell::Text(s) => Json::String(s.clone()),
        Cell::Missing => Json::Null,
    }
}

fn toml_to_json(v: &Value) -> Json {
    match v {
        Value::String(s) => Json::String(s.clone()),
        Value::Integer(i) => Json::from(*i),
        Value::Float(x) => serde_json::Number::from_f64(*x).map_or(Json::Null, Json::Number),
        Value::Boolean(b) => Json::Bool(*b),
        Value::Array(a) => Json::Array(a.iter().map(toml_to_json).collect()),
        other => Json::String(other.to_string()),
    }
}

pub fn render_csv(config: &RunConfig, out: &Output) -> String {
    let mut s = String::new();
    s.push_str(&format!("# pt-forge {}\n# [config]\n", env!("CARGO_PKG_VERSION")));
    for line in config.to_document().lines() {
        s.push_str("# ");
        s.push_str(line);
        s.push('\n');
    }
    s.push_str("# [result]\n");
    let mut result = Table::new();
    for (k, v) in &out.meta.0 {
        result.insert(k.clone(), meta_value(v));
    }
    for line in result.to_string().lines() {
        s.push_str("# ");
        s.push_str(line);
        s.push('\n');
    }
    s.push_str(&out.columns.join(","));
    s.push('\n');
    for row in &out.rows {
        let cells: Vec<String> = row.iter().map(csv_cell).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn render_json(config: &RunConfig, out: &Output) -> String {
    let config_json: Map<String, Json> = config
        .to_table()
        .iter()
        .map(|(k, v)| (k.clone(), toml_to_json(v)))
        .collect();
    let result_json: Map<String, Json> = out.meta.0.iter().map(|(k, v)| (k.clone(), json_cell(v))).collect();
    let rows: Vec<Json> = out
        .rows
        .iter()
        .map(|r| Json::Array(r.iter().map(json_cell).collect()))
        .collect();
    let doc = serde_json::json!({
        "code_version": env!("CARGO_PKG_VERSION"),
        "config": config_json,
        "result": result_json,
        "columns": out.columns,
        "rows": rows,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON values are always serializable");
    text.push('\n');
    text
}

pub fn render(config: &RunConfig, out: &Output) -> String {
    match config.format {
        Format::Csv => render_csv(config, out),
        Format::Json => render_json(config, out),
    }
}
