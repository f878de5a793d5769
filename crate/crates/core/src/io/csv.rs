use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// Raw series read from a CSV file whose first column is `timestamp`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub timestamps: Vec<String>,
    pub columns: Vec<String>,
    /// One vector per column, aligned with `timestamps`.
    pub values: Vec<Vec<f64>>,
}

fn err(path: &str, line: u64, column: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_owned(),
        line,
        column,
        message: message.into(),
    }
}

pub fn read_csv(path: &Path) -> Result<RawTable> {
    let f = File::open(path).map_err(|e| err(&path.display().to_string(), 0, 0, e.to_string()))?;
    read_csv_from(f, &path.display().to_string())
}

/// Parses CSV from any reader; `name` labels diagnostics.
pub fn read_csv_from<R: Read>(reader: R, name: &str) -> Result<RawTable> {
    let mut rdr = ::csv::ReaderBuilder::new()
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| err(name, 1, 0, e.to_string()))?.clone();
    if header.get(0) != Some("timestamp") {
        return Err(err(name, 1, 1, "first column must be named `timestamp`"));
    }
    if header.len() < 2 {
        return Err(err(name, 1, 2, "no series columns"));
    }
    let columns: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    for (i, c) in columns.iter().enumerate() {
        if c.is_empty() {
            return Err(err(name, 1, i as u64 + 2, "empty column name"));
        }
        if columns[..i].contains(c) {
            return Err(err(name, 1, i as u64 + 2, format!("duplicate column `{c}`")));
        }
    }
    let width = header.len();
    let mut timestamps = Vec::new();
    let mut lines = Vec::new();
    let mut values = vec![Vec::new(); columns.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            err(name, line, 0, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() > width {
            return Err(err(
                name,
                line,
                width as u64 + 1,
                format!("expected {width} cells, found {}", rec.len()),
            ));
        }
        for col in 0..width {
            let cell = rec.get(col).unwrap_or("");
            if cell.is_empty() {
                return Err(err(name, line, col as u64 + 1, "missing value"));
            }
            if col == 0 {
                timestamps.push(cell.to_owned());
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| err(name, line, col as u64 + 1, format!("`{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(err(
                    name,
                    line,
                    col as u64 + 1,
                    format!("non-finite value `{cell}`"),
                ));
            }
            values[col - 1].push(v);
        }
        lines.push(line);
    }
    check_order(&timestamps, &lines, name)?;
    Ok(RawTable {
        timestamps,
        columns,
        values,
    })
}

/// Timestamps must increase, numerically when all parse as numbers, else lexicographically.
fn check_order(ts: &[String], lines: &[u64], name: &str) -> Result<()> {
    let numeric: Option<Vec<f64>> = ts.iter().map(|t| t.parse().ok()).collect();
    for i in 1..ts.len() {
        let ok = match &numeric {
            Some(n) => n[i - 1] < n[i],
            None => ts[i - 1] < ts[i],
        };
        if !ok {
            return Err(err(
                name,
                lines[i],
                1,
                format!("timestamp `{}` does not follow `{}`", ts[i], ts[i - 1]),
            ));
        }
    }
    Ok(())
}

/// Writes series with a 1-based integer timestamp column.
pub fn write_csv(path: &Path, ids: &[String], values: &[Vec<f64>]) -> Result<()> {
    let mut w = ::csv::Writer::from_writer(std::io::BufWriter::new(File::create(path)?));
    let mut header = vec!["timestamp".to_owned()];
    header.extend(ids.iter().cloned());
    w.write_record(&header).map_err(std::io::Error::from)?;
    let len = values.first().map_or(0, Vec::len);
    let mut row = Vec::with_capacity(ids.len() + 1);
    for t in 0..len {
        row.clear();
        row.push((t + 1).to_string());
        row.extend(values.iter().map(|v| v[t].to_string()));
        w.write_record(&row).map_err(std::io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}
