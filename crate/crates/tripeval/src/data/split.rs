//! Seeded train/holdout splitting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::table::DataTable;
use crate::error::{Error, Result};

/// Sizes and seed for a train/holdout split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SplitSpec {
    pub train_size: usize,
    pub holdout_size: usize,
    pub seed: u64,
}

/// Split a table into disjoint train and holdout sets, sampled uniformly
/// without replacement. The same `(table, spec)` always yields the same
/// partition.
pub fn split(table: &DataTable, spec: &SplitSpec) -> Result<(DataTable, DataTable)> {
    let needed = spec.train_size + spec.holdout_size;
    if needed > table.n_rows() {
        return Err(Error::SplitTooLarge {
            requested: needed,
            available: table.n_rows(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut indices: Vec<usize> = (0..table.n_rows()).collect();
    indices.shuffle(&mut rng);
    let train = table.select_rows(&indices[..spec.train_size]);
    let holdout = table.select_rows(&indices[spec.train_size..needed]);
    Ok((train, holdout))
}
