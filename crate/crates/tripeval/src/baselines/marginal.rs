//! Per-column empirical marginal models shared by the baseline generators.

use std::collections::BTreeMap;

use crate::data::{Cell, ColumnKind, DataTable};
use crate::error::{Error, Result};

/// Empirical distribution of one numeric column: the sorted observed values
/// with plotting positions `(i + 0.5) / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericMarginal {
    sorted: Vec<f64>,
}

impl NumericMarginal {
    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("numeric marginal needs values".into()));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        Ok(NumericMarginal { sorted })
    }

    /// Midrank CDF, clamped away from 0 and 1 so the Gaussian transform
    /// stays finite.
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.sorted.len() as f64;
        let below = self.sorted.partition_point(|&v| v < x) as f64;
        let at_or_below = self.sorted.partition_point(|&v| v <= x) as f64;
        let mid = (below + 0.5 * (at_or_below - below)) / n;
        mid.clamp(0.5 / n, 1.0 - 0.5 / n)
    }

    /// Inverse CDF with linear interpolation between plotting positions.
    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.sorted.len();
        let u = u.clamp(0.0, 1.0);
        let p = |i: usize| (i as f64 + 0.5) / n as f64;
        if u <= p(0) {
            return self.sorted[0];
        }
        if u >= p(n - 1) {
            return self.sorted[n - 1];
        }
        // Index i with p(i) <= u < p(i + 1): u*n - 0.5 lies in [i, i+1).
        let pos = u * n as f64 - 0.5;
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        self.sorted[i] + frac * (self.sorted[i + 1] - self.sorted[i])
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        *self.sorted.last().unwrap()
    }
}

/// Frequencies of one categorical column over lexicographically sorted
/// values, stored as cumulative interval ends.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalMarginal {
    values: Vec<String>,
    cumulative: Vec<f64>,
}

impl CategoricalMarginal {
    pub fn fit(cells: &[&str]) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::EmptyInput("categorical marginal needs values".into()));
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for c in cells {
            *counts.entry(c).or_insert(0) += 1;
        }
        let n = cells.len() as f64;
        let mut values = Vec::with_capacity(counts.len());
        let mut cumulative = Vec::with_capacity(counts.len());
        let mut acc = 0.0;
        for (value, count) in counts {
            acc += count as f64 / n;
            values.push(value.to_string());
            cumulative.push(acc);
        }
        // Guard against rounding drift at the top end.
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(CategoricalMarginal { values, cumulative })
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn frequency(&self, value: &str) -> f64 {
        match self.values.iter().position(|v| v == value) {
            Some(i) => {
                let lo = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
                self.cumulative[i] - lo
            }
            None => 0.0,
        }
    }

    /// Midpoint of the value's cumulative-frequency interval, used as the
    /// deterministic forward transform for correlation estimation.
    pub fn cdf_mid(&self, value: &str) -> f64 {
        match self.values.iter().position(|v| v == value) {
            Some(i) => {
                let lo = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
                (lo + self.cumulative[i]) / 2.0
            }
            None => 0.5,
        }
    }

    /// Value whose cumulative interval contains `u`.
    pub fn sample(&self, u: f64) -> &str {
        let i = self.cumulative.partition_point(|&c| c < u);
        &self.values[i.min(self.values.len() - 1)]
    }
}

/// One marginal per column kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    Numeric(NumericMarginal),
    Categorical(CategoricalMarginal),
}

impl Marginal {
    pub fn fit_column(table: &DataTable, col: usize) -> Result<Marginal> {
        match table.schema().columns[col].kind {
            ColumnKind::Categorical => {
                let cells: Vec<&str> = table
                    .rows()
                    .iter()
                    .map(|r| r[col].as_str().expect("preprocessed table"))
                    .collect();
                Ok(Marginal::Categorical(CategoricalMarginal::fit(&cells)?))
            }
            ColumnKind::Integer | ColumnKind::Float => {
                let values: Vec<f64> = table
                    .rows()
                    .iter()
                    .map(|r| r[col].as_f64().expect("preprocessed table"))
                    .collect();
                Ok(Marginal::Numeric(NumericMarginal::fit(&values)?))
            }
        }
    }

    /// Draw a cell of the right kind from a uniform score in (0, 1).
    pub fn cell_from_uniform(&self, u: f64, kind: ColumnKind) -> Cell {
        match self {
            Marginal::Categorical(m) => Cell::Cat(m.sample(u).to_string()),
            Marginal::Numeric(m) => {
                let v = m.quantile(u);
                match kind {
                    ColumnKind::Integer => Cell::Int(v.round() as i64),
                    _ => Cell::Float(v),
                }
            }
        }
    }
}
