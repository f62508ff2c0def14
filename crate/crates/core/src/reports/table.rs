use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }

    fn parse(raw: &str) -> Cell {
        if let Ok(i) = raw.parse::<i64>() {
            return Cell::Int(i);
        }
        match raw.parse::<f64>() {
            Ok(x) => Cell::Float(x),
            Err(_) => Cell::Text(raw.to_string()),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Float(x) if x.is_nan() => f.write_str("nan"),
            // 17 significant digits round-trip every f64
            Cell::Float(x) => write!(f, "{x:.16e}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Column-named rows plus `#`-prefixed `key: value` metadata.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { meta: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    /// Numeric column; non-numeric cells fail.
    pub fn floats(&self, name: &str) -> Result<Vec<f64>> {
        self.column(name)
            .ok_or_else(|| Error::Config(format!("no column '{name}'")))?
            .into_iter()
            .map(|c| c.as_f64().ok_or_else(|| Error::Config(format!("non-numeric cell in '{name}'"))))
            .collect()
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in &self.meta {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_string))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn write_path(&self, path: &Path) -> Result<()> {
        self.write_to(File::create(path)?)
    }

    pub fn read_from<R: Read>(input: R) -> Result<Self> {
        let mut reader = BufReader::new(input);
        let mut meta = Vec::new();
        let mut body = String::new();
        let mut line = String::new();
        while reader.read_line(&mut line)? > 0 {
            match line.strip_prefix("# ") {
                Some(rest) if body.is_empty() => {
                    let (k, v) = rest.trim_end().split_once(": ").unwrap_or((rest.trim_end(), ""));
                    meta.push((k.to_string(), v.to_string()));
                }
                _ => body.push_str(&line),
            }
            line.clear();
        }
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let columns = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| Ok(rec?.iter().map(Cell::parse).collect()))
            .collect::<Result<_>>()?;
        Ok(Self { meta, columns, rows })
    }

    pub fn read_path(path: &Path) -> Result<Self> {
        Self::read_from(File::open(path)?)
    }
}
