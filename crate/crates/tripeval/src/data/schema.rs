//! Column kinds and table schemas.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three column kinds a trip table can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Categorical,
    Integer,
    Float,
}

impl ColumnKind {
    pub fn is_numeric(self) -> bool {
        matches!(self, ColumnKind::Integer | ColumnKind::Float)
    }
}

/// One named, typed column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

/// Ordered column layout plus an optional regression target.
///
/// Column names are unique; the target, when set, must name a `Float` column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSchema {
    pub columns: Vec<Column>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
}

impl TableSchema {
    pub fn new(columns: Vec<(String, ColumnKind)>, target: Option<String>) -> Result<Self> {
        let schema = TableSchema {
            columns: columns
                .into_iter()
                .map(|(name, kind)| Column { name, kind })
                .collect(),
            target,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for col in &self.columns {
            if !seen.insert(col.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column {:?}", col.name)));
            }
        }
        if let Some(target) = &self.target {
            match self.columns.iter().find(|c| &c.name == target) {
                None => {
                    return Err(Error::Schema(format!(
                        "target {target:?} is not a schema column"
                    )))
                }
                Some(c) if c.kind != ColumnKind::Float => {
                    return Err(Error::NotFloat(target.clone()))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Position of a column by name.
    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::NoSuchColumn(name.to_string()))
    }

    pub fn kind_of(&self, name: &str) -> Result<ColumnKind> {
        Ok(self.columns[self.index_of(name)?].kind)
    }

    /// Load a schema from a JSON file of the form
    /// `{"columns": [{"name": ..., "kind": ...}, ...], "target": ...}`.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let schema: TableSchema = serde_json::from_str(&text)
            .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }
}
