//! CSV reading and writing shared by the front ends.
//!
//! Output tables begin with a `# thresholdq <name> v1` schema comment and a
//! column header row. Floats print in shortest round-trip form, so files
//! are byte-stable across runs and platforms and lose no precision.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::cascade::FieldEntry;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("no data rows found")]
    Empty,
}

/// Shortest representation that parses back to the identical bits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x}")
    }
}

/// Writes the schema comment and the column header row.
pub fn write_header<W: Write>(mut w: W, name: &str, columns: &[&str]) -> io::Result<()> {
    writeln!(w, "# thresholdq {name} v{SCHEMA_VERSION}")?;
    writeln!(w, "{}", columns.join(","))
}

fn split_row(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

fn is_header(fields: &[&str]) -> bool {
    fields.iter().any(|f| f.parse::<f64>().is_err())
}

/// Reads a numeric series, one sample per row.
///
/// Comment lines (`#`), blank lines, and one leading header row are
/// skipped. Rows may carry extra leading columns (such as a day index); the
/// last column is the value.
pub fn read_series<R: BufRead>(reader: R) -> Result<Vec<f64>, CsvError> {
    let mut out = Vec::new();
    let mut saw_row = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields = split_row(trimmed);
        if !saw_row && is_header(&fields) {
            saw_row = true;
            continue;
        }
        saw_row = true;
        let last = fields.last().expect("split yields at least one field");
        let value = last.parse::<f64>().map_err(|_| CsvError::Parse {
            line: idx + 1,
            reason: format!("expected a number, got {last:?}"),
        })?;
        out.push(value);
    }
    if out.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(out)
}

/// Reads a threshold field from `(offset, state, weight)` rows.
///
/// Offsets are distances below the cascade's starting price. Semantic
/// checks (ordering, signs) are left to the field's own validation.
pub fn read_field<R: BufRead>(reader: R) -> Result<Vec<FieldEntry>, CsvError> {
    let mut out = Vec::new();
    let mut saw_row = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields = split_row(trimmed);
        if !saw_row && is_header(&fields) {
            saw_row = true;
            continue;
        }
        saw_row = true;
        let parse_err = |reason: String| CsvError::Parse {
            line: idx + 1,
            reason,
        };
        if fields.len() != 3 {
            return Err(parse_err(format!(
                "expected 3 columns (offset, state, weight), got {}",
                fields.len()
            )));
        }
        let position = fields[0]
            .parse::<f64>()
            .map_err(|_| parse_err(format!("bad offset {:?}", fields[0])))?;
        let state = fields[1]
            .parse::<i8>()
            .map_err(|_| parse_err(format!("bad state {:?}", fields[1])))?;
        let weight = fields[2]
            .parse::<f64>()
            .map_err(|_| parse_err(format!("bad weight {:?}", fields[2])))?;
        out.push(FieldEntry {
            position,
            state,
            weight,
        });
    }
    if out.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(out)
}
