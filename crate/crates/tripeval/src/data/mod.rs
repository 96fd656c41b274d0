//! Trip-table ingestion, preprocessing, splitting and numeric encoding.

mod csv_io;
mod encode;
mod preprocess;
mod schema;
mod split;
mod table;

pub use csv_io::{load_csv, save_csv};
pub use encode::{ColumnEncoding, ColumnSpan, EncodedMatrix, Encoder};
pub use preprocess::{preprocess_trips, PreprocessReport, PreprocessSpec};
pub use schema::{Column, ColumnKind, TableSchema};
pub use split::{split, SplitSpec};
pub use table::{Cell, DataTable};
