//! CSV tables: a header plus rows of equal width, numbers written with 17
//! significant digits so they read back bit-exactly.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{CliError, Result};

/// A table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Int(u64),
    Empty,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{}", format_num(*v)),
            Cell::Text(s) => f.write_str(s),
            Cell::Int(n) => write!(f, "{n}"),
            Cell::Empty => Ok(()),
        }
    }
}

/// 17 significant digits in scientific notation.
pub fn format_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// 6 significant digits for human-readable reports.
pub fn format_short(v: f64) -> String {
    format_sig(v, 6)
}

/// `digits` significant digits, fixed notation for moderate magnitudes.
pub fn format_sig(v: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if v == 0.0 {
        return format!("{:.*}", digits, 0.0);
    }
    // round first so 9.9999999 lands in the right decade
    let sci = format!("{:.*e}", digits - 1, v);
    let exp: i32 = sci[sci.find('e').map_or(0, |i| i + 1)..].parse().unwrap_or(0);
    if (-4..digits as i32).contains(&exp) {
        format!("{:.*}", (digits as i32 - 1 - exp).max(0) as usize, v)
    } else {
        sci
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl ResultsTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Appends a row; it must match the header width and hold only finite numbers.
    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(CliError::Computation(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.header.len()
            )));
        }
        for (cell, name) in row.iter().zip(&self.header) {
            if let Cell::Num(v) = cell {
                if !v.is_finite() {
                    return Err(CliError::Computation(format!("non-finite value {v} in column {name}")));
                }
            }
        }
        self.rows.push(row);
        Ok(())
    }

    /// Index of the named column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let wrap = |e: csv::Error| CliError::Computation(format!("formatting table: {e}"));
        w.write_record(&self.header).map_err(wrap)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string())).map_err(wrap)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Computation(format!("formatting table: {e}")))
    }

    /// Writes the whole table at once, so a failure never leaves a partial file.
    pub fn write(&self, path: &Path) -> Result<()> {
        let bytes = self.to_csv_bytes()?;
        fs::write(path, bytes).map_err(|e| CliError::io(path, e))
    }

    /// Reads a table back; cells that parse as numbers become [`Cell::Num`].
    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|source| CliError::Csv {
            path: path.into(),
            source,
        })?;
        let header = r.headers().map_err(|source| CliError::Csv {
            path: path.into(),
            source,
        })?;
        let mut table = ResultsTable::new(header.iter());
        for rec in r.records() {
            let rec = rec.map_err(|source| CliError::Csv {
                path: path.into(),
                source,
            })?;
            let row = rec
                .iter()
                .map(|s| match s.parse::<f64>() {
                    _ if s.is_empty() => Cell::Empty,
                    Ok(v) if s.contains(['.', 'e']) => Cell::Num(v),
                    _ => s.parse::<u64>().map(Cell::Int).unwrap_or_else(|_| Cell::text(s)),
                })
                .collect();
            table.push(row)?;
        }
        Ok(table)
    }
}
