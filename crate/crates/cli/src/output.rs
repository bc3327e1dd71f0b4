use std::io::Write;

use serde_json::{json, Map, Value};

use crate::args::{Format, OutputArgs};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Null,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(v) => json!(v),
            Cell::Null => Value::Null,
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => format!("{v}"),
            Cell::Num(_) | Cell::Null => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }
}

/// A tidy table plus free-form metadata.
///
/// CSV output carries the table only; JSON output nests the same rows under
/// `rows` next to the metadata.
#[derive(Debug, Default)]
pub struct Report {
    pub command: String,
    pub meta: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| (c.clone(), v.to_json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        json!({
            "command": self.command,
            "meta": Value::Object(self.meta.clone()),
            "rows": rows,
        })
    }

    fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::to_csv))?;
        }
        w.flush()
    }

    fn write_to(&self, sink: &mut dyn Write, format: Format) -> std::io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *sink, &self.to_json())?;
                writeln!(sink)?;
            }
            Format::Csv => self.write_csv(&mut *sink)?,
        }
        sink.flush()
    }

    /// A closed downstream pipe ends output quietly.
    pub fn emit(&self, args: &OutputArgs) -> Result<(), CliError> {
        let result = match &args.output {
            Some(path) => std::fs::File::create(path)
                .and_then(|mut f| self.write_to(&mut f, args.format))
                .map_err(|e| format!("{}: {e}", path.display())),
            None => match self.write_to(&mut std::io::stdout().lock(), args.format) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(|e| e.to_string()),
            },
        };
        result.map_err(CliError::Output)
    }
}
