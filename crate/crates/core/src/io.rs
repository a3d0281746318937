//! CSV ingestion and emission for data matrices. All numeric output is
//! written with Rust's shortest round-trip decimal formatting, so files
//! reproduce byte-for-byte under a fixed seed and parse back exactly.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::data::{DataMatrix, MarginTag};
use crate::error::{CoreError, Result};

/// Writes an n×d matrix as CSV with header `x1,...,xd`.
pub fn write_matrix_csv(data: &DataMatrix, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    let header: Vec<String> = (1..=data.ncols()).map(|j| format!("x{j}")).collect();
    writeln!(out, "{}", header.join(","))?;
    let mut line = String::new();
    for row in data.rows_iter() {
        line.clear();
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a CSV with a header row into a matrix tagged with the given margin.
pub fn read_matrix_csv(path: &Path, margin: MarginTag) -> Result<DataMatrix> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| CoreError::invalid_data("read_matrix_csv", "empty file"))??;
    let d = header.split(',').count();
    if d == 0 {
        return Err(CoreError::invalid_data("read_matrix_csv", "empty header"));
    }
    let mut values = Vec::new();
    let mut rows = 0usize;
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut count = 0usize;
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| {
                CoreError::invalid_data(
                    "read_matrix_csv",
                    format!("row {}: cannot parse '{}'", lineno + 2, field),
                )
            })?;
            values.push(v);
            count += 1;
        }
        if count != d {
            return Err(CoreError::invalid_data(
                "read_matrix_csv",
                format!("row {} has {count} fields, expected {d}", lineno + 2),
            ));
        }
        rows += 1;
    }
    DataMatrix::new(values, rows, d, margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    #[test]
    fn csv_roundtrip_is_exact() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("data.csv");
        let data = DataMatrix::new(
            vec![
                0.1,
                -2.5e-17,
                std::f64::consts::PI,
                1.0 / 3.0,
                f64::MAX / 2.0,
                -123.456,
            ],
            3,
            2,
            MarginTag::Laplace,
        )
        .unwrap();
        write_matrix_csv(&data, &path).unwrap();
        let back = read_matrix_csv(&path, MarginTag::Laplace).unwrap();
        assert_eq!(data, back);

        // byte-identical on rewrite
        let text1 = std::fs::read(&path).unwrap();
        write_matrix_csv(&back, &path).unwrap();
        let text2 = std::fs::read(&path).unwrap();
        assert_eq!(text1, text2);
    }

    #[test]
    fn read_rejects_ragged_rows() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x1,x2\n1.0,2.0\n3.0\n").unwrap();
        assert!(read_matrix_csv(&path, MarginTag::Raw).is_err());
    }

    #[test]
    fn read_rejects_non_numeric() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("bad2.csv");
        std::fs::write(&path, "x1\n1.0\nfoo\n").unwrap();
        assert!(read_matrix_csv(&path, MarginTag::Raw).is_err());
    }
}
