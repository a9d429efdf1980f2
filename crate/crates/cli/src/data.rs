//! CSV input and output. Every cell is numeric; floats are written with the
//! shortest representation that parses back to the same value.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::CliError;

/// Shortest round-trip text for a float.
pub fn format_real(x: f64) -> String {
    format!("{x:?}")
}

/// A parsed numeric CSV with its source line numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub path: PathBuf,
    pub header: Vec<String>,
    pub lines: Vec<u64>,
    pub rows: Vec<Vec<f64>>,
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    let message = e.to_string();
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        _ => CliError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        },
    }
}

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.iter().all(String::is_empty) {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "missing header row".into(),
        });
    }
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .zip(&header)
            .map(|(cell, name)| {
                cell.parse::<f64>().map_err(|_| CliError::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("column {name}: {cell:?} is not a number"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        lines.push(line);
        rows.push(row);
    }
    Ok(Table {
        path: path.to_path_buf(),
        header,
        lines,
        rows,
    })
}

impl Table {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn parse_error(&self, line: u64, message: impl Into<String>) -> CliError {
        CliError::Parse {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    /// Rows restricted to `names`, in that order. Other columns are ignored.
    pub fn select(&self, names: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
        let idx = names
            .iter()
            .map(|name| {
                self.header
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| self.parse_error(1, format!("missing column {name}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if self.rows.is_empty() {
            return Err(self.parse_error(1, "no data rows"));
        }
        Ok(self
            .rows
            .iter()
            .map(|row| idx.iter().map(|&j| row[j]).collect())
            .collect())
    }

    /// Checks that `value` in row `row` is a whole number no smaller than `min`.
    pub fn integer(&self, row: usize, column: &str, value: f64, min: i64) -> Result<i64, CliError> {
        if value.fract() == 0.0 && value >= min as f64 && value < i64::MAX as f64 {
            Ok(value as i64)
        } else {
            Err(self.parse_error(
                self.lines[row],
                format!("column {column}: expected an integer >= {min}, got {value}"),
            ))
        }
    }
}

/// Writes a CSV through a temporary sibling file, so the destination either
/// holds the complete table or is untouched.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Usage(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    let result = (|| -> Result<(), CliError> {
        let file = File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
        let mut writer = csv::Writer::from_writer(BufWriter::new(file));
        writer
            .write_record(header)
            .map_err(|e| csv_error(&tmp, e))?;
        for row in rows {
            writer.write_record(row).map_err(|e| csv_error(&tmp, e))?;
        }
        let mut inner = writer
            .into_inner()
            .map_err(|e| CliError::io(&tmp, e.into_error()))?;
        inner.flush().map_err(|e| CliError::io(&tmp, e))?;
        Ok(())
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::io(path, e)
    })
}
