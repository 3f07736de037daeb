//! Tabular reports and their CSV / JSON renderings.

use std::io::Write;
use std::path::{Path, PathBuf};

use collectikit::optics::Ratio;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Ratio(Ratio),
    Empty,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn opt(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }

    /// CSV form: shortest round-trip decimal (exponent form below 1e-6 or
    /// from 1e16), `inf` for an infinite ratio.
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) => render_f64(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Ratio(r) => r.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => json!(x.to_string()),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
            Cell::Ratio(Ratio::Finite(r)) => json!(r),
            Cell::Ratio(Ratio::Infinite) => json!("inf"),
            Cell::Empty => Value::Null,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(n) => Some(*n as f64),
            Cell::Ratio(r) => Some(r.value()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Self {
            name,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width for table {}",
            self.name
        );
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Cell at `row`, `column`; panics on an unknown column.
    pub fn cell(&self, row: usize, column: &str) -> &Cell {
        let k = self
            .column(column)
            .unwrap_or_else(|| panic!("no column {column} in {}", self.name));
        &self.rows[row][k]
    }

    pub fn write_csv<W: Write>(&self, out: W) -> CliResult<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
            .collect();
        json!({ "name": self.name, "columns": self.columns, "rows": rows })
    }
}

/// Output of one experiment. The first table is the primary one.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
    /// Failed internal checks; the output is still written, then the run exits 2.
    pub violations: Vec<String>,
}

impl Report {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self, config: &RunConfig) -> Value {
        json!({
            "experiment": config.experiment.name(),
            "config": config,
            "tables": self.tables.iter().map(Table::to_json).collect::<Vec<_>>(),
            "notes": self.notes,
            "violations": self.violations,
        })
    }

    /// Writes to `config.out` or stdout. CSV to a file puts the primary
    /// table at the path and table `name` at `<stem>.<name>.csv` beside it;
    /// CSV to stdout precedes each table with a `# name` line.
    pub fn emit(&self, config: &RunConfig) -> CliResult<Vec<PathBuf>> {
        match (config.format, &config.out) {
            (Format::Json, Some(path)) => {
                let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
                write_json(&mut f, &self.to_json(config))?;
                f.flush()?;
                Ok(vec![path.clone()])
            }
            (Format::Json, None) => {
                write_json(std::io::stdout().lock(), &self.to_json(config))?;
                Ok(Vec::new())
            }
            (Format::Csv, Some(path)) => {
                let mut written = Vec::new();
                for (k, t) in self.tables.iter().enumerate() {
                    let p = if k == 0 {
                        path.clone()
                    } else {
                        sibling(path, t.name)
                    };
                    t.write_csv(std::io::BufWriter::new(std::fs::File::create(&p)?))?;
                    written.push(p);
                }
                Ok(written)
            }
            (Format::Csv, None) => {
                let mut out = std::io::stdout().lock();
                for (k, t) in self.tables.iter().enumerate() {
                    if k > 0 {
                        writeln!(out)?;
                    }
                    writeln!(out, "# {}", t.name)?;
                    t.write_csv(&mut out)?;
                }
                Ok(Vec::new())
            }
        }
    }
}

fn render_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-6..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn write_json<W: Write>(mut w: W, v: &Value) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut w, v).map_err(std::io::Error::from)?;
    writeln!(w)?;
    Ok(())
}

/// `dir/run.csv` + `scan` → `dir/run.scan.csv`.
pub fn sibling(path: &Path, name: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    path.with_file_name(format!("{stem}.{name}.{ext}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rendering() {
        let mut t = Table::new("t", &["a", "b", "c", "d", "e"]);
        t.push(vec![
            Cell::Num(-0.25),
            Cell::Ratio(Ratio::Infinite),
            Cell::Empty,
            Cell::Num(1e-7),
            Cell::Num(0.5),
        ]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "a,b,c,d,e\n-0.25,inf,,1e-7,0.5\n"
        );
    }

    #[test]
    fn json_has_no_bare_infinity() {
        assert_eq!(Cell::Ratio(Ratio::Infinite).to_json(), json!("inf"));
        assert_eq!(Cell::Ratio(Ratio::Finite(3.0)).to_json(), json!(3.0));
    }

    #[test]
    fn sibling_names() {
        assert_eq!(
            sibling(Path::new("/x/run.csv"), "scan"),
            PathBuf::from("/x/run.scan.csv")
        );
        assert_eq!(
            sibling(Path::new("out"), "scan"),
            PathBuf::from("out.scan.csv")
        );
    }
}
