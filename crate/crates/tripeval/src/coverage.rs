//! k-NN coverage: the share of real points whose nearest-neighbor
//! hypersphere contains at least one synthetic point.
//!
//! Each real point gets a radius equal to the distance to its k-th nearest
//! other real point; the point counts as covered when some synthetic point
//! lies within that radius (ties included). Low coverage signals mode
//! dropping in the generator.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::EncodedMatrix;
use crate::distance::l2;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct CoverageConfig {
    /// Which nearest neighbor defines the hypersphere radius.
    pub k: usize,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        CoverageConfig { k: 5 }
    }
}

/// Fraction of `real` rows covered by `synth`, in [0, 1].
pub fn coverage(real: &EncodedMatrix, synth: &EncodedMatrix, cfg: &CoverageConfig) -> Result<f64> {
    if real.n_cols() != synth.n_cols() {
        return Err(Error::EncoderMismatch {
            left: real.n_cols(),
            right: synth.n_cols(),
        });
    }
    if synth.n_rows() == 0 {
        return Err(Error::EmptyInput("coverage needs a non-empty synthetic set".into()));
    }
    if cfg.k < 1 || cfg.k >= real.n_rows() {
        return Err(Error::InvalidParameter(format!(
            "coverage k must satisfy 1 <= k < n_real, got k={} with n_real={}",
            cfg.k,
            real.n_rows()
        )));
    }

    let radii = knn_radii(real, cfg.k);
    let covered: Vec<bool> = (0..real.n_rows())
        .into_par_iter()
        .map(|i| {
            let r = real.row(i);
            // Early exit on the first synthetic point inside the sphere.
            synth.rows_iter().any(|s| l2(r, s) <= radii[i])
        })
        .collect();
    Ok(covered.iter().filter(|&&c| c).count() as f64 / real.n_rows() as f64)
}

/// Distance from every row to its k-th nearest other row of the same set.
pub fn knn_radii(points: &EncodedMatrix, k: usize) -> Vec<f64> {
    let n = points.n_rows();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut dists: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| l2(points.row(i), points.row(j)))
                .collect();
            let (_, kth, _) = dists.select_nth_unstable_by(k - 1, |a, b| {
                a.partial_cmp(b).expect("finite distances")
            });
            *kth
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(values: &[f64]) -> EncodedMatrix {
        EncodedMatrix::from_rows(values.iter().map(|&v| vec![v]).collect()).unwrap()
    }

    /// Naive double-loop oracle used by the parity tests.
    pub(crate) fn coverage_brute(
        real: &EncodedMatrix,
        synth: &EncodedMatrix,
        k: usize,
    ) -> f64 {
        let n = real.n_rows();
        let mut covered = 0usize;
        for i in 0..n {
            let mut dists: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| l2(real.row(i), real.row(j)))
                .collect();
            dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let radius = dists[k - 1];
            if (0..synth.n_rows()).any(|s| l2(real.row(i), synth.row(s)) <= radius) {
                covered += 1;
            }
        }
        covered as f64 / n as f64
    }

    #[test]
    fn self_coverage_is_one() {
        let real = col(&[0.0, 1.0, 2.0, 5.0]);
        let c = coverage(&real, &real, &CoverageConfig { k: 1 }).unwrap();
        assert_eq!(c, 1.0);
    }

    #[test]
    fn distant_synth_covers_nothing() {
        let real = col(&[0.0, 1.0, 2.0]);
        let synth = col(&[100.0, 101.0]);
        let c = coverage(&real, &synth, &CoverageConfig { k: 2 }).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn hand_case_two_thirds() {
        // radii at k=1: |0-1|=1, |1-0|=1, |5-1|=4. synth {0.5} covers the
        // first two points only.
        let real = col(&[0.0, 1.0, 5.0]);
        let synth = col(&[0.5]);
        let c = coverage(&real, &synth, &CoverageConfig { k: 1 }).unwrap();
        assert!((c - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn k_out_of_range() {
        let real = col(&[0.0, 1.0]);
        let synth = col(&[0.0]);
        assert!(coverage(&real, &synth, &CoverageConfig { k: 2 }).is_err());
        assert!(coverage(&real, &synth, &CoverageConfig { k: 0 }).is_err());
    }

    #[test]
    fn matches_brute_force_exactly() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let n = rng.random_range(6..60);
            let m = rng.random_range(1..60);
            let d = rng.random_range(1..5);
            let real = EncodedMatrix::from_rows(
                (0..n)
                    .map(|_| (0..d).map(|_| rng.random_range(0.0..1.0)).collect())
                    .collect(),
            )
            .unwrap();
            let synth = EncodedMatrix::from_rows(
                (0..m)
                    .map(|_| (0..d).map(|_| rng.random_range(0.0..1.0)).collect())
                    .collect(),
            )
            .unwrap();
            for k in [1usize, 3, 5] {
                if k >= n {
                    continue;
                }
                let fast = coverage(&real, &synth, &CoverageConfig { k }).unwrap();
                let slow = coverage_brute(&real, &synth, k);
                assert_eq!(fast, slow);
            }
        }
    }

    #[test]
    fn monotone_in_k_and_synth() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        let real = col(&(0..40).map(|_| rng.random_range(0.0..1.0)).collect::<Vec<_>>());
        let synth_small = col(&(0..5).map(|_| rng.random_range(0.0..1.0)).collect::<Vec<_>>());
        let mut extra: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..1.0)).collect();
        let mut both: Vec<f64> = (0..synth_small.n_rows()).map(|i| synth_small.row(i)[0]).collect();
        both.append(&mut extra);
        let synth_big = col(&both);

        let mut last = 0.0;
        for k in 1..=6 {
            let c = coverage(&real, &synth_small, &CoverageConfig { k }).unwrap();
            assert!(c >= last, "coverage must grow with k");
            last = c;
        }
        for k in [1, 3, 5] {
            let small = coverage(&real, &synth_small, &CoverageConfig { k }).unwrap();
            let big = coverage(&real, &synth_big, &CoverageConfig { k }).unwrap();
            assert!(big >= small, "adding synthetic points cannot lower coverage");
        }
    }
}
