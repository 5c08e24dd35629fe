//! Self-describing tabular output and atomic file writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One table cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
}

impl Cell {
    fn csv(&self) -> String {
        match *self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) if x.is_nan() => "nan".to_string(),
            Cell::Real(x) if x.is_infinite() => if x > 0.0 { "inf" } else { "-inf" }.to_string(),
            Cell::Real(x) => format!("{x:.16e}"),
        }
    }

    fn json(&self) -> Value {
        match *self {
            Cell::Int(i) => json!(i),
            Cell::Real(x) => json!(x),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(schema: &str, columns: &[&str]) -> Self {
        Self {
            schema: schema.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// First line `# schema=<name> version=<v> config=<json>`, then the
    /// column names, then one line per row at 17 significant digits.
    pub fn to_csv(&self, config: &Value) -> String {
        let mut out = header_line(&self.schema, config);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, config: &Value) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        json!({
            "schema": self.schema,
            "version": VERSION,
            "config": config,
            "columns": self.columns,
            "rows": rows,
        })
    }
}

pub fn header_line(schema: &str, config: &Value) -> String {
    let mut line = String::new();
    let _ = writeln!(line, "# schema={schema} version={VERSION} config={config}");
    line
}

/// Wrap a serializable payload with schema, version and configuration.
pub fn json_document<T: Serialize>(schema: &str, config: &Value, payload: &T) -> Result<Value> {
    Ok(json!({
        "schema": schema,
        "version": VERSION,
        "config": config,
        "result": serde_json::to_value(payload)?,
    }))
}

/// Extract the configuration recorded in a CSV header or JSON document.
pub fn read_config(contents: &str) -> Result<Value> {
    if let Some(first) = contents.lines().next() {
        if let Some(rest) = first.strip_prefix("# schema=") {
            let start = rest
                .find("config=")
                .ok_or_else(|| Error::invalid("CSV header has no config block"))?;
            return Ok(serde_json::from_str(&rest[start + "config=".len()..])?);
        }
    }
    let doc: Value = serde_json::from_str(contents)?;
    doc.get("config")
        .cloned()
        .ok_or_else(|| Error::invalid("document has no config block"))
}

/// Write `contents` to `path` through a temporary file in the same
/// directory and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
