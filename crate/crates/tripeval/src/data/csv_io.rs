//! CSV ingestion and emission (RFC 4180, UTF-8, header row required).

use std::io::Write;
use std::path::Path;

use crate::data::schema::{ColumnKind, TableSchema};
use crate::data::table::{Cell, DataTable};
use crate::error::{Error, Result};

/// Load a CSV file against a schema.
///
/// The header must contain exactly the schema's column names, in any order;
/// columns are reordered to the schema order. Unparseable numeric cells are
/// recorded as missing rather than failing the load. A row with the wrong
/// number of fields is a hard error naming the line.
pub fn load_csv(path: &Path, schema: &TableSchema) -> Result<DataTable> {
    schema.validate()?;
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);

    let headers = reader.headers()?.clone();
    // Every header column must be known to the schema...
    for h in headers.iter() {
        if schema.index_of(h).is_err() {
            return Err(Error::UnknownColumn(h.to_string()));
        }
    }
    // ...and every schema column must be present in the file.
    let mut source_pos = Vec::with_capacity(schema.len());
    for col in &schema.columns {
        match headers.iter().position(|h| h == col.name) {
            Some(p) => source_pos.push(p),
            None => return Err(Error::MissingColumn(col.name.clone())),
        }
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != headers.len() {
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            return Err(Error::RowArity {
                line,
                expected: headers.len(),
                found: record.len(),
            });
        }
        let row = schema
            .columns
            .iter()
            .zip(&source_pos)
            .map(|(col, &p)| parse_cell(&record[p], col.kind))
            .collect();
        rows.push(row);
    }
    DataTable::new(schema.clone(), rows)
}

fn parse_cell(raw: &str, kind: ColumnKind) -> Cell {
    let raw = raw.trim();
    match kind {
        ColumnKind::Categorical => {
            if raw.is_empty() {
                Cell::Missing
            } else {
                Cell::Cat(raw.to_string())
            }
        }
        ColumnKind::Integer => match raw.parse::<i64>() {
            Ok(v) => Cell::Int(v),
            // Integer columns in the wild often arrive as "1.0".
            Err(_) => match raw.parse::<f64>() {
                Ok(v) if v.is_finite() && v.fract() == 0.0 => Cell::Int(v as i64),
                _ => Cell::Missing,
            },
        },
        ColumnKind::Float => match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Cell::Float(v),
            _ => Cell::Missing,
        },
    }
}

/// Write a table as CSV with a header row, matching the schema column order.
pub fn save_csv(table: &DataTable, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut writer = csv::Writer::from_writer(std::io::BufWriter::new(file));
    write_csv(table, &mut writer)
}

pub(crate) fn write_csv<W: Write>(table: &DataTable, writer: &mut csv::Writer<W>) -> Result<()> {
    writer.write_record(table.schema().columns.iter().map(|c| c.name.as_str()))?;
    for row in table.rows() {
        writer.write_record(row.iter().map(Cell::render))?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}
