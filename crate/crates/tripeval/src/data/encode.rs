//! Numeric embedding of trip tables for distance-based metrics.
//!
//! Categorical columns become one-hot indicator blocks (vocabulary sorted
//! lexicographically, fixed at fit time); numeric columns are min-max scaled
//! to [0, 1] using ranges captured from the fitting table. Other tables
//! encoded with the same descriptor are clamped into [0, 1] and unseen
//! categories produce an all-zero indicator block.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::data::schema::{ColumnKind, TableSchema};
use crate::data::table::DataTable;
use crate::error::{Error, Result};

/// How one source column maps into the encoded matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnEncoding {
    /// One indicator column per vocabulary entry, in vocabulary order.
    OneHot { vocabulary: Vec<String> },
    /// Single column scaled by `(v - min) / (max - min)`; constant columns
    /// (min == max) encode to 0.0 everywhere.
    MinMax { min: f64, max: f64 },
}

impl ColumnEncoding {
    fn width(&self) -> usize {
        match self {
            ColumnEncoding::OneHot { vocabulary } => vocabulary.len(),
            ColumnEncoding::MinMax { .. } => 1,
        }
    }
}

/// Per-column encodings plus the source schema they were fitted against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    schema: TableSchema,
    columns: Vec<ColumnEncoding>,
}

/// Span of encoded columns produced by one source column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpan {
    pub start: usize,
    pub width: usize,
}

impl Encoder {
    /// Capture vocabularies and numeric ranges from a fitted (preprocessed)
    /// table.
    pub fn fit(table: &DataTable) -> Result<Self> {
        if table.n_rows() == 0 {
            return Err(Error::EmptyInput("cannot fit encoder on empty table".into()));
        }
        if table.has_missing() {
            return Err(Error::Schema(
                "cannot fit encoder on a table with missing cells; preprocess first".into(),
            ));
        }
        let schema = table.schema();
        let mut columns = Vec::with_capacity(schema.len());
        for (idx, col) in schema.columns.iter().enumerate() {
            let enc = match col.kind {
                ColumnKind::Categorical => {
                    let vocab: BTreeSet<String> = table
                        .rows()
                        .iter()
                        .filter_map(|r| r[idx].as_str().map(str::to_string))
                        .collect();
                    ColumnEncoding::OneHot {
                        vocabulary: vocab.into_iter().collect(),
                    }
                }
                ColumnKind::Integer | ColumnKind::Float => {
                    let mut min = f64::INFINITY;
                    let mut max = f64::NEG_INFINITY;
                    for row in table.rows() {
                        let v = row[idx].as_f64().expect("no missing cells");
                        min = min.min(v);
                        max = max.max(v);
                    }
                    ColumnEncoding::MinMax { min, max }
                }
            };
            columns.push(enc);
        }
        Ok(Encoder {
            schema: schema.clone(),
            columns,
        })
    }

    pub fn schema(&self) -> &TableSchema {
        &self.schema
    }

    pub fn column_encodings(&self) -> &[ColumnEncoding] {
        &self.columns
    }

    /// Total encoded width.
    pub fn width(&self) -> usize {
        self.columns.iter().map(ColumnEncoding::width).sum()
    }

    /// Encoded span for each source column, in schema order.
    pub fn column_map(&self) -> Vec<ColumnSpan> {
        let mut start = 0;
        self.columns
            .iter()
            .map(|enc| {
                let span = ColumnSpan {
                    start,
                    width: enc.width(),
                };
                start += enc.width();
                span
            })
            .collect()
    }

    /// Range captured for a numeric column, if it is one.
    pub fn numeric_range(&self, name: &str) -> Result<(f64, f64)> {
        let idx = self.schema.index_of(name)?;
        match &self.columns[idx] {
            ColumnEncoding::MinMax { min, max } => Ok((*min, *max)),
            _ => Err(Error::NotFloat(name.to_string())),
        }
    }

    /// Encode a table. Its schema must equal the descriptor's source schema.
    pub fn encode(&self, table: &DataTable) -> Result<EncodedMatrix> {
        if table.schema() != &self.schema {
            return Err(Error::Schema(
                "table schema does not match the encoder's source schema".into(),
            ));
        }
        if table.has_missing() {
            return Err(Error::Schema(
                "cannot encode a table with missing cells; preprocess first".into(),
            ));
        }
        let width = self.width();
        let mut data = vec![0.0; table.n_rows() * width];
        for (r, row) in table.rows().iter().enumerate() {
            let out = &mut data[r * width..(r + 1) * width];
            let mut at = 0;
            for (cell, enc) in row.iter().zip(&self.columns) {
                match enc {
                    ColumnEncoding::OneHot { vocabulary } => {
                        let value = cell.as_str().expect("kind checked at construction");
                        if let Ok(pos) = vocabulary.binary_search_by(|v| v.as_str().cmp(value)) {
                            out[at + pos] = 1.0;
                        }
                        at += vocabulary.len();
                    }
                    ColumnEncoding::MinMax { min, max } => {
                        let v = cell.as_f64().expect("kind checked at construction");
                        out[at] = if max > min {
                            ((v - min) / (max - min)).clamp(0.0, 1.0)
                        } else {
                            0.0
                        };
                        at += 1;
                    }
                }
            }
        }
        Ok(EncodedMatrix {
            data,
            rows: table.n_rows(),
            cols: width,
        })
    }
}

/// Row-major real matrix holding the encoded form of a table.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl EncodedMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * cols);
        for row in &rows {
            if row.len() != cols {
                return Err(Error::InvalidParameter("ragged matrix rows".into()));
            }
            data.extend_from_slice(row);
        }
        Ok(EncodedMatrix { data, rows: n, cols })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.cols.max(1))
    }

    /// New matrix containing the given row indices, in order.
    pub fn select_rows(&self, indices: &[usize]) -> EncodedMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        EncodedMatrix {
            data,
            rows: indices.len(),
            cols: self.cols,
        }
    }

    /// Multiply every entry by a constant (used by scale-equivariance tests).
    pub fn scaled(&self, factor: f64) -> EncodedMatrix {
        EncodedMatrix {
            data: self.data.iter().map(|v| v * factor).collect(),
            rows: self.rows,
            cols: self.cols,
        }
    }
}
