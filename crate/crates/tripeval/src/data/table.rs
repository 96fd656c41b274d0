//! Row storage for trip tables.

use crate::data::schema::{ColumnKind, TableSchema};
use crate::error::{Error, Result};

/// One cell of a trip table.
///
/// `Missing` is only legal before preprocessing; a preprocessed table carries
/// no missing cells.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Cat(String),
    Int(i64),
    Float(f64),
    Missing,
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    /// Numeric view of an `Int` or `Float` cell.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Float(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Cat(s) => Some(s),
            _ => None,
        }
    }

    /// Render the cell the way `save_csv` writes it.
    pub fn render(&self) -> String {
        match self {
            Cell::Cat(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Missing => String::new(),
        }
    }
}

/// Shortest representation that round-trips through `f64` parsing.
pub(crate) fn format_float(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains(['.', 'e', 'E', 'n', 'i']) {
        s.push_str(".0");
    }
    s
}

/// A typed table of trip records. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    schema: TableSchema,
    rows: Vec<Vec<Cell>>,
}

impl DataTable {
    pub fn new(schema: TableSchema, rows: Vec<Vec<Cell>>) -> Result<Self> {
        schema.validate()?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(Error::RowArity {
                    line: i as u64 + 1,
                    expected: schema.len(),
                    found: row.len(),
                });
            }
            for (cell, col) in row.iter().zip(&schema.columns) {
                let ok = match (cell, col.kind) {
                    (Cell::Missing, _) => true,
                    (Cell::Cat(_), ColumnKind::Categorical) => true,
                    (Cell::Int(_), ColumnKind::Integer) => true,
                    (Cell::Float(v), ColumnKind::Float) => v.is_finite(),
                    _ => false,
                };
                if !ok {
                    return Err(Error::Schema(format!(
                        "row {} cell for column {:?} does not match kind {:?}",
                        i + 1,
                        col.name,
                        col.kind
                    )));
                }
            }
        }
        Ok(DataTable { schema, rows })
    }

    pub fn schema(&self) -> &TableSchema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.schema.len()
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn cell(&self, row: usize, col: usize) -> &Cell {
        &self.rows[row][col]
    }

    /// True if any cell anywhere is missing.
    pub fn has_missing(&self) -> bool {
        self.rows.iter().flatten().any(Cell::is_missing)
    }

    /// Values of a named float/integer column as `f64`.
    pub fn numeric_column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.schema.index_of(name)?;
        if !self.schema.columns[idx].kind.is_numeric() {
            return Err(Error::NotFloat(name.to_string()));
        }
        self.rows
            .iter()
            .map(|r| {
                r[idx]
                    .as_f64()
                    .ok_or_else(|| Error::NonFinite(format!("missing cell in column {name:?}")))
            })
            .collect()
    }

    /// New table containing the given row indices, in order.
    pub fn select_rows(&self, indices: &[usize]) -> DataTable {
        DataTable {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::ColumnKind::*;

    #[test]
    fn arity_checked() {
        let schema = TableSchema::new(
            vec![("zone".into(), Categorical), ("fare".into(), Float)],
            None,
        )
        .unwrap();
        let err = DataTable::new(schema, vec![vec![Cell::Cat("A".into())]]).unwrap_err();
        assert!(matches!(err, Error::RowArity { line: 1, .. }));
    }

    #[test]
    fn kind_checked() {
        let schema = TableSchema::new(vec![("fare".into(), Float)], None).unwrap();
        let err = DataTable::new(schema, vec![vec![Cell::Cat("oops".into())]]).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn float_render_round_trips() {
        for v in [0.0, 1.0, -3.25, 68739.0, 1.0e-9, f64::MAX] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "render {s}");
        }
    }
}
