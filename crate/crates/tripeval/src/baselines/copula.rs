//! Gaussian copula over empirical marginals.
//!
//! Fitting maps every cell to a latent Gaussian score through its column's
//! empirical CDF, estimates the Pearson correlation of those scores, and
//! repairs the matrix to positive semi-definite by eigenvalue clipping.
//! Sampling draws correlated normals, pushes them back through the normal
//! CDF and inverts each marginal.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::baselines::marginal::Marginal;
use crate::data::{Cell, DataTable, TableSchema};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CopulaModel {
    schema: TableSchema,
    marginals: Vec<Marginal>,
    correlation: DMatrix<f64>,
    /// Cholesky factor of the repaired correlation matrix.
    factor: DMatrix<f64>,
}

impl CopulaModel {
    pub fn fit(train: &DataTable) -> Result<Self> {
        if train.n_rows() == 0 {
            return Err(Error::EmptyInput("copula fit needs rows".into()));
        }
        let d = train.n_cols();
        let marginals: Vec<Marginal> = (0..d)
            .map(|c| Marginal::fit_column(train, c))
            .collect::<Result<_>>()?;

        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        let n = train.n_rows();
        // Latent scores, column major for the correlation pass.
        let mut scores = vec![vec![0.0f64; n]; d];
        for (c, marginal) in marginals.iter().enumerate() {
            for (r, row) in train.rows().iter().enumerate() {
                let u = match marginal {
                    Marginal::Numeric(m) => m.cdf(row[c].as_f64().expect("preprocessed")),
                    Marginal::Categorical(m) => m.cdf_mid(row[c].as_str().expect("preprocessed")),
                };
                scores[c][r] = normal.inverse_cdf(u);
            }
        }

        let correlation = pearson_matrix(&scores);
        let repaired = nearest_psd(&correlation);
        let factor = robust_cholesky(&repaired)?;
        Ok(CopulaModel {
            schema: train.schema().clone(),
            marginals,
            correlation: repaired,
            factor,
        })
    }

    pub fn correlation(&self) -> &DMatrix<f64> {
        &self.correlation
    }

    pub fn schema(&self) -> &TableSchema {
        &self.schema
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<DataTable> {
        if n == 0 {
            return Err(Error::InvalidParameter("sample size must be >= 1".into()));
        }
        let d = self.schema.len();
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::with_capacity(n);
        let mut g = DVector::zeros(d);
        for _ in 0..n {
            for v in g.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
            let z = &self.factor * &g;
            let row: Vec<Cell> = (0..d)
                .map(|c| {
                    let u = normal.cdf(z[c]);
                    self.marginals[c].cell_from_uniform(u, self.schema.columns[c].kind)
                })
                .collect();
            rows.push(row);
        }
        DataTable::new(self.schema.clone(), rows)
    }
}

/// Pearson correlation of column-major score vectors. Constant columns get
/// zero correlation with everything (their transform carries no signal).
fn pearson_matrix(scores: &[Vec<f64>]) -> DMatrix<f64> {
    let d = scores.len();
    let n = scores[0].len() as f64;
    let means: Vec<f64> = scores.iter().map(|c| c.iter().sum::<f64>() / n).collect();
    let stds: Vec<f64> = scores
        .iter()
        .zip(&means)
        .map(|(c, m)| (c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt())
        .collect();

    let mut corr = DMatrix::identity(d, d);
    for i in 0..d {
        for j in (i + 1)..d {
            if stds[i] == 0.0 || stds[j] == 0.0 {
                continue;
            }
            let cov = scores[i]
                .iter()
                .zip(&scores[j])
                .map(|(a, b)| (a - means[i]) * (b - means[j]))
                .sum::<f64>()
                / n;
            let r = (cov / (stds[i] * stds[j])).clamp(-1.0, 1.0);
            corr[(i, j)] = r;
            corr[(j, i)] = r;
        }
    }
    corr
}

/// Clip eigenvalues at 1e-10 and renormalize to unit diagonal.
fn nearest_psd(matrix: &DMatrix<f64>) -> DMatrix<f64> {
    let eigen = nalgebra::SymmetricEigen::new(matrix.clone());
    let clipped = DVector::from_iterator(
        eigen.eigenvalues.len(),
        eigen.eigenvalues.iter().map(|&l| l.max(1e-10)),
    );
    let mut repaired =
        &eigen.eigenvectors * DMatrix::from_diagonal(&clipped) * eigen.eigenvectors.transpose();
    let d = repaired.nrows();
    let scale: Vec<f64> = (0..d).map(|i| repaired[(i, i)].sqrt()).collect();
    for i in 0..d {
        for j in 0..d {
            repaired[(i, j)] /= scale[i] * scale[j];
        }
    }
    // Exact symmetry against accumulated rounding.
    for i in 0..d {
        repaired[(i, i)] = 1.0;
        for j in 0..i {
            let avg = (repaired[(i, j)] + repaired[(j, i)]) / 2.0;
            repaired[(i, j)] = avg;
            repaired[(j, i)] = avg;
        }
    }
    repaired
}

/// Cholesky with escalating ridge; the repair above makes failure unlikely
/// but renormalization can reintroduce tiny negative eigenvalues.
fn robust_cholesky(matrix: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut ridge = 0.0;
    for _ in 0..12 {
        let mut candidate = matrix.clone();
        if ridge > 0.0 {
            for i in 0..candidate.nrows() {
                candidate[(i, i)] += ridge;
            }
        }
        if let Some(chol) = nalgebra::Cholesky::new(candidate) {
            return Ok(chol.l());
        }
        ridge = if ridge == 0.0 { 1e-10 } else { ridge * 10.0 };
    }
    Err(Error::NonFinite(
        "copula correlation matrix could not be factorized".into(),
    ))
}
