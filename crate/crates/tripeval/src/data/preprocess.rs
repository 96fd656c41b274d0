//! Trip-table preprocessing: column drops, datetime expansion, row cleanup.

use chrono::{Datelike, NaiveDateTime, Timelike};

use crate::data::schema::{Column, ColumnKind, TableSchema};
use crate::data::table::{Cell, DataTable};
use crate::error::{Error, Result};

/// What `preprocess_trips` should do to a table.
#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
pub struct PreprocessSpec {
    /// Columns removed outright.
    #[serde(default)]
    pub drop_columns: Vec<String>,
    /// Columns holding datetimes, each replaced by `<name>_weekday` and
    /// `<name>_time`.
    #[serde(default)]
    pub datetime_columns: Vec<String>,
}

/// What happened during preprocessing.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PreprocessReport {
    pub columns_dropped: Vec<String>,
    /// Rows removed because a cell was missing or a datetime failed to parse.
    pub rows_dropped: usize,
    pub rows_kept: usize,
}

const DATETIME_FORMATS: [&str; 2] = ["%Y-%m-%d %H:%M:%S", "%m/%d/%Y %I:%M:%S %p"];

fn parse_datetime(raw: &str) -> Option<NaiveDateTime> {
    DATETIME_FORMATS
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(raw.trim(), fmt).ok())
}

/// Drop columns, expand datetime columns into weekday ("0".."6", 0 = Monday)
/// and time (seconds since midnight), then remove any row that still has a
/// missing cell.
///
/// An unparseable datetime cell drops the row, not the run; dropping the
/// schema's target column is a hard error.
pub fn preprocess_trips(
    table: &DataTable,
    spec: &PreprocessSpec,
) -> Result<(DataTable, PreprocessReport)> {
    let schema = table.schema();
    for name in spec.drop_columns.iter().chain(&spec.datetime_columns) {
        schema.index_of(name)?;
        if schema.target.as_deref() == Some(name.as_str()) {
            return Err(Error::DropTarget(name.clone()));
        }
    }

    // Output layout: surviving columns in order, datetime columns replaced
    // in place by their weekday/time pair.
    enum Slot {
        Keep(usize),
        Datetime(usize),
    }
    let mut slots = Vec::new();
    let mut out_columns: Vec<Column> = Vec::new();
    for (idx, col) in schema.columns.iter().enumerate() {
        if spec.drop_columns.contains(&col.name) {
            continue;
        }
        if spec.datetime_columns.contains(&col.name) {
            slots.push(Slot::Datetime(idx));
            out_columns.push(Column {
                name: format!("{}_weekday", col.name),
                kind: ColumnKind::Categorical,
            });
            out_columns.push(Column {
                name: format!("{}_time", col.name),
                kind: ColumnKind::Float,
            });
        } else {
            slots.push(Slot::Keep(idx));
            out_columns.push(col.clone());
        }
    }

    let out_schema = TableSchema {
        columns: out_columns,
        target: schema.target.clone(),
    };
    out_schema.validate()?;

    let mut rows = Vec::with_capacity(table.n_rows());
    let mut dropped = 0usize;
    'row: for row in table.rows() {
        let mut out = Vec::with_capacity(out_schema.len());
        for slot in &slots {
            match slot {
                Slot::Keep(idx) => {
                    let cell = &row[*idx];
                    if cell.is_missing() {
                        dropped += 1;
                        continue 'row;
                    }
                    out.push(cell.clone());
                }
                Slot::Datetime(idx) => {
                    let parsed = match &row[*idx] {
                        Cell::Cat(raw) => parse_datetime(raw),
                        _ => None,
                    };
                    let Some(dt) = parsed else {
                        dropped += 1;
                        continue 'row;
                    };
                    out.push(Cell::Cat(dt.weekday().num_days_from_monday().to_string()));
                    out.push(Cell::Float(dt.num_seconds_from_midnight() as f64));
                }
            }
        }
        rows.push(out);
    }

    let kept = rows.len();
    let out = DataTable::new(out_schema, rows)?;
    Ok((
        out,
        PreprocessReport {
            columns_dropped: spec.drop_columns.clone(),
            rows_dropped: dropped,
            rows_kept: kept,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::ColumnKind::*;

    /// Independent calendar oracle: days since 1970-01-01 via the civil
    /// calendar algorithm, then weekday from the known epoch anchor
    /// (1970-01-01 was a Thursday).
    fn oracle_weekday(y: i64, m: i64, d: i64) -> u32 {
        let y = if m <= 2 { y - 1 } else { y };
        let era = if y >= 0 { y } else { y - 399 } / 400;
        let yoe = y - era * 400;
        let mp = (m + 9) % 12;
        let doy = (153 * mp + 2) / 5 + d - 1;
        let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        let days = era * 146097 + doe - 719468;
        // 1970-01-01 = Thursday = 3 in Monday-based numbering.
        ((days + 3).rem_euclid(7)) as u32
    }

    fn dt_schema() -> TableSchema {
        TableSchema::new(
            vec![("pickup".into(), Categorical), ("fare".into(), Float)],
            None,
        )
        .unwrap()
    }

    fn dt_table(cells: &[&str]) -> DataTable {
        DataTable::new(
            dt_schema(),
            cells
                .iter()
                .map(|c| vec![Cell::Cat(c.to_string()), Cell::Float(1.0)])
                .collect(),
        )
        .unwrap()
    }

    fn dt_spec() -> PreprocessSpec {
        PreprocessSpec {
            drop_columns: vec![],
            datetime_columns: vec!["pickup".into()],
        }
    }

    #[test]
    fn datetime_expansion_matches_calendar_oracle() {
        let (out, report) = preprocess_trips(&dt_table(&["2015-01-15 19:05:39"]), &dt_spec()).unwrap();
        assert_eq!(report.rows_dropped, 0);
        assert_eq!(out.schema().columns[0].name, "pickup_weekday");
        assert_eq!(out.schema().columns[1].name, "pickup_time");
        assert_eq!(oracle_weekday(2015, 1, 15), 3);
        assert_eq!(out.cell(0, 0), &Cell::Cat("3".into()));
        assert_eq!(out.cell(0, 1), &Cell::Float(68739.0));
    }

    #[test]
    fn monday_midnight() {
        let (out, _) = preprocess_trips(&dt_table(&["2015-01-05 00:00:00"]), &dt_spec()).unwrap();
        assert_eq!(oracle_weekday(2015, 1, 5), 0);
        assert_eq!(out.cell(0, 0), &Cell::Cat("0".into()));
        assert_eq!(out.cell(0, 1), &Cell::Float(0.0));
    }

    #[test]
    fn us_style_datetime_accepted() {
        let (out, _) = preprocess_trips(&dt_table(&["01/15/2015 07:05:39 PM"]), &dt_spec()).unwrap();
        assert_eq!(out.cell(0, 0), &Cell::Cat("3".into()));
        assert_eq!(out.cell(0, 1), &Cell::Float(68739.0));
    }

    #[test]
    fn weekday_oracle_sweep() {
        // Every day of 2015 and 2019-03 against chrono.
        use chrono::NaiveDate;
        let mut date = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
        let end = NaiveDate::from_ymd_opt(2019, 4, 1).unwrap();
        while date < end {
            assert_eq!(
                date.weekday().num_days_from_monday(),
                oracle_weekday(date.year() as i64, date.month() as i64, date.day() as i64),
                "{date}"
            );
            date = date.succ_opt().unwrap();
        }
    }

    #[test]
    fn bad_datetime_drops_row() {
        let (out, report) =
            preprocess_trips(&dt_table(&["not a date", "2015-01-05 00:00:00"]), &dt_spec()).unwrap();
        assert_eq!(out.n_rows(), 1);
        assert_eq!(report.rows_dropped, 1);
        assert_eq!(report.rows_kept, 1);
    }

    #[test]
    fn fully_missing_column_droppable() {
        let schema = TableSchema::new(
            vec![("ehail_fee".into(), Float), ("fare".into(), Float)],
            None,
        )
        .unwrap();
        let table = DataTable::new(
            schema,
            vec![
                vec![Cell::Missing, Cell::Float(1.0)],
                vec![Cell::Missing, Cell::Float(2.0)],
            ],
        )
        .unwrap();
        let spec = PreprocessSpec {
            drop_columns: vec!["ehail_fee".into()],
            datetime_columns: vec![],
        };
        let (out, report) = preprocess_trips(&table, &spec).unwrap();
        assert_eq!(out.n_rows(), 2);
        assert!(out.schema().index_of("ehail_fee").is_err());
        assert_eq!(report.columns_dropped, vec!["ehail_fee".to_string()]);
    }

    #[test]
    fn dropping_target_is_hard_error() {
        let schema = TableSchema::new(vec![("fare".into(), Float)], Some("fare".into())).unwrap();
        let table = DataTable::new(schema, vec![vec![Cell::Float(1.0)]]).unwrap();
        let spec = PreprocessSpec {
            drop_columns: vec!["fare".into()],
            datetime_columns: vec![],
        };
        assert!(matches!(
            preprocess_trips(&table, &spec).unwrap_err(),
            Error::DropTarget(_)
        ));
    }

    #[test]
    fn missing_rows_removed() {
        let schema = TableSchema::new(
            vec![("zone".into(), Categorical), ("fare".into(), Float)],
            None,
        )
        .unwrap();
        let table = DataTable::new(
            schema,
            vec![
                vec![Cell::Cat("A".into()), Cell::Float(1.0)],
                vec![Cell::Cat("B".into()), Cell::Missing],
            ],
        )
        .unwrap();
        let (out, report) = preprocess_trips(&table, &PreprocessSpec::default()).unwrap();
        assert_eq!(out.n_rows(), 1);
        assert_eq!(report.rows_dropped, 1);
        assert!(!out.has_missing());
    }

    #[test]
    fn idempotent() {
        let table = dt_table(&["2015-01-15 19:05:39", "garbage", "2015-01-05 00:00:00"]);
        let (once, _) = preprocess_trips(&table, &dt_spec()).unwrap();
        // Second pass has nothing left to do: no drops, no datetime columns.
        let (twice, report) = preprocess_trips(&once, &PreprocessSpec::default()).unwrap();
        assert_eq!(once, twice);
        assert_eq!(report.rows_dropped, 0);
    }
}
