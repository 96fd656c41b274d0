//! Reference synthetic-data generators.
//!
//! Three baselines exercise the evaluation pipeline without any external
//! model: a Gaussian copula (a real generative baseline), an
//! independent-marginal sampler (destroys joint structure, keeps marginals)
//! and a noisy memorizer (replays training rows plus noise, the canonical
//! privacy failure the DCR ratio must detect).

mod copula;
mod marginal;

pub use copula::CopulaModel;
pub use marginal::{CategoricalMarginal, Marginal, NumericMarginal};

use rand::Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Cell, ColumnKind, DataTable, TableSchema};
use crate::error::{Error, Result};

/// Which baseline to build, plus its knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    GaussianCopula,
    IndependentMarginals,
    NoisyMemorizer,
}

impl GeneratorKind {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorKind::GaussianCopula => "gaussian_copula",
            GeneratorKind::IndependentMarginals => "independent_marginals",
            GeneratorKind::NoisyMemorizer => "noisy_memorizer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    /// Memorizer noise, in encoded units (fraction of each numeric column's
    /// fitted range).
    #[serde(default = "default_noise_sigma")]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_noise_sigma() -> f64 {
    0.01
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind) -> Self {
        GeneratorSpec {
            kind,
            noise_sigma: default_noise_sigma(),
            seed: 0,
        }
    }
}

/// A fitted generator, ready to sample.
#[derive(Debug, Clone)]
pub enum FittedGenerator {
    GaussianCopula(CopulaModel),
    IndependentMarginals(MarginalSampler),
    NoisyMemorizer(Memorizer),
}

/// Per-column marginals with the joint structure discarded.
#[derive(Debug, Clone)]
pub struct MarginalSampler {
    schema: TableSchema,
    marginals: Vec<Marginal>,
}

impl MarginalSampler {
    fn fit(train: &DataTable) -> Result<Self> {
        if train.n_rows() == 0 {
            return Err(Error::EmptyInput("marginal sampler needs rows".into()));
        }
        let marginals = (0..train.n_cols())
            .map(|c| Marginal::fit_column(train, c))
            .collect::<Result<_>>()?;
        Ok(MarginalSampler {
            schema: train.schema().clone(),
            marginals,
        })
    }

    fn sample(&self, n: usize, seed: u64) -> Result<DataTable> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|_| {
                self.marginals
                    .iter()
                    .zip(&self.schema.columns)
                    .map(|(m, col)| m.cell_from_uniform(rng.random::<f64>(), col.kind))
                    .collect()
            })
            .collect();
        DataTable::new(self.schema.clone(), rows)
    }
}

/// Stores the training table; samples rows with replacement and perturbs
/// numeric cells with Gaussian noise scaled by the column's range.
#[derive(Debug, Clone)]
pub struct Memorizer {
    train: DataTable,
    /// (min, max) per column for numeric ones.
    ranges: Vec<Option<(f64, f64)>>,
    sigma: f64,
}

impl Memorizer {
    fn fit(train: &DataTable, sigma: f64) -> Result<Self> {
        if train.n_rows() == 0 {
            return Err(Error::EmptyInput("memorizer needs rows".into()));
        }
        if sigma < 0.0 {
            return Err(Error::InvalidParameter("noise_sigma must be >= 0".into()));
        }
        let ranges = train
            .schema()
            .columns
            .iter()
            .enumerate()
            .map(|(c, col)| {
                col.kind.is_numeric().then(|| {
                    let mut min = f64::INFINITY;
                    let mut max = f64::NEG_INFINITY;
                    for row in train.rows() {
                        let v = row[c].as_f64().expect("preprocessed");
                        min = min.min(v);
                        max = max.max(v);
                    }
                    (min, max)
                })
            })
            .collect();
        Ok(Memorizer {
            train: train.clone(),
            ranges,
            sigma,
        })
    }

    pub fn n_stored_rows(&self) -> usize {
        self.train.n_rows()
    }

    fn sample(&self, n: usize, seed: u64) -> Result<DataTable> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let schema = self.train.schema().clone();
        let rows = (0..n)
            .map(|_| {
                let src = rng.random_range(0..self.train.n_rows());
                self.train.rows()[src]
                    .iter()
                    .enumerate()
                    .map(|(c, cell)| match (&self.ranges[c], cell) {
                        (Some((min, max)), cell) => {
                            let v = cell.as_f64().expect("numeric cell");
                            // sigma is in encoded units; scale by the range
                            // so sigma = 0 reproduces the row exactly.
                            let noise: f64 = StandardNormal.sample(&mut rng);
                            let perturbed = (v + self.sigma * (max - min) * noise)
                                .clamp(*min, *max);
                            match schema.columns[c].kind {
                                ColumnKind::Integer => Cell::Int(perturbed.round() as i64),
                                _ => Cell::Float(perturbed),
                            }
                        }
                        (None, cell) => cell.clone(),
                    })
                    .collect()
            })
            .collect();
        DataTable::new(schema, rows)
    }
}

/// Fit the requested baseline on a preprocessed training table.
pub fn fit_generator(train: &DataTable, spec: &GeneratorSpec) -> Result<FittedGenerator> {
    if train.has_missing() {
        return Err(Error::Schema(
            "generators require a preprocessed table without missing cells".into(),
        ));
    }
    Ok(match spec.kind {
        GeneratorKind::GaussianCopula => FittedGenerator::GaussianCopula(CopulaModel::fit(train)?),
        GeneratorKind::IndependentMarginals => {
            FittedGenerator::IndependentMarginals(MarginalSampler::fit(train)?)
        }
        GeneratorKind::NoisyMemorizer => {
            FittedGenerator::NoisyMemorizer(Memorizer::fit(train, spec.noise_sigma)?)
        }
    })
}

/// Draw `n` rows; the same `(generator, n, seed)` always yields the same
/// table.
pub fn sample(generator: &FittedGenerator, n: usize, seed: u64) -> Result<DataTable> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be >= 1".into()));
    }
    match generator {
        FittedGenerator::GaussianCopula(model) => model.sample(n, seed),
        FittedGenerator::IndependentMarginals(model) => model.sample(n, seed),
        FittedGenerator::NoisyMemorizer(model) => model.sample(n, seed),
    }
}
