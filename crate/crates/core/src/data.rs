//! The universal sample container: an n×d observation matrix with a margin tag.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Marginal scale of the columns of a [`DataMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginTag {
    Raw,
    Uniform,
    Exponential,
    Laplace,
}

impl std::fmt::Display for MarginTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MarginTag::Raw => "raw",
            MarginTag::Uniform => "uniform",
            MarginTag::Exponential => "exponential",
            MarginTag::Laplace => "laplace",
        };
        f.write_str(s)
    }
}

/// Row-major n×d matrix of observations on a stated marginal scale.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
    margin: MarginTag,
}

impl DataMatrix {
    pub fn new(values: Vec<f64>, rows: usize, cols: usize, margin: MarginTag) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(CoreError::Dimension {
                op: "DataMatrix::new",
                expected: rows * cols,
                got: values.len(),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(CoreError::invalid_data(
                "DataMatrix::new",
                "non-finite entry",
            ));
        }
        Ok(DataMatrix {
            values,
            rows,
            cols,
            margin,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], margin: MarginTag) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(n * d);
        for row in rows {
            if row.len() != d {
                return Err(CoreError::Dimension {
                    op: "DataMatrix::from_rows",
                    expected: d,
                    got: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        DataMatrix::new(values, n, d, margin)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn margin(&self) -> MarginTag {
        self.margin
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.cols)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.values[i * self.cols + j]).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Rebuilds the matrix with a different margin tag; used by transforms
    /// that change scale column by column.
    pub fn with_values(&self, values: Vec<f64>, margin: MarginTag) -> Result<Self> {
        DataMatrix::new(values, self.rows, self.cols, margin)
    }
}
