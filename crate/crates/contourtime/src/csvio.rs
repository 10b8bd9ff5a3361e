//! Minimal CSV helpers for the fixed file schemas used by this crate.
//!
//! All files are plain comma-separated numeric tables with a mandatory
//! header line. Parsing reports the offending line number.

use crate::error::{Error, Result};
use std::fs;
use std::path::Path;

/// Reads a numeric CSV with the exact expected header and a fixed column
/// count. Returns one `Vec<f64>` per data row.
pub fn read_table(path: &Path, expected_header: &str) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    let name = path.display().to_string();
    let mut lines = text.lines().enumerate();

    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: name.clone(),
        line: 1,
        msg: "empty file".into(),
    })?;
    if header.trim() != expected_header {
        return Err(Error::Parse {
            path: name,
            line: 1,
            msg: format!("expected header `{expected_header}`, found `{}`", header.trim()),
        });
    }
    let ncols = expected_header.split(',').count();

    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(ncols);
        for field in line.split(',') {
            let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
                path: name.clone(),
                line: idx + 1,
                msg: format!("not a number: `{}`", field.trim()),
            })?;
            row.push(value);
        }
        if row.len() != ncols {
            return Err(Error::Parse {
                path: name.clone(),
                line: idx + 1,
                msg: format!("expected {ncols} columns, found {}", row.len()),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Formats a float with 15 significant digits, the fixed format used for
/// reference files so that repeated runs are byte identical.
pub fn fmt15(v: f64) -> String {
    format!("{v:.14e}")
}

/// Formats a float with enough digits to round-trip exactly.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn rejects_bad_header_and_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let mut f = fs::File::create(&p).unwrap();
        writeln!(f, "x,y").unwrap();
        writeln!(f, "1.0,2.0").unwrap();
        writeln!(f, "1.0,oops").unwrap();
        let err = read_table(&p, "x,y").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(read_table(&p, "a,b").is_err());
    }

    #[test]
    fn empty_file_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        fs::File::create(&p).unwrap();
        assert!(matches!(read_table(&p, "x,y"), Err(Error::Parse { .. })));
    }

    #[test]
    fn fmt15_round_trips_to_15_digits() {
        let s = fmt15(std::f64::consts::PI);
        assert_eq!(s, "3.14159265358979e0");
    }
}
