//! Downstream-task utility: gradient-boosted regression on encoded features
//! and R-squared over the six train/predict combinations.

mod tree;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::data::{Cell, DataTable, EncodedMatrix, Encoder, TableSchema};
use crate::error::{Error, Result};
use tree::{fit_tree, RegressionTree, TreeParams};

/// Least-squares boosting settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GbmConfig {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Fraction of rows drawn (without replacement) per boosting stage.
    pub subsample: f64,
    pub seed: u64,
}

impl Default for GbmConfig {
    fn default() -> Self {
        GbmConfig {
            n_trees: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples_leaf: 1,
            subsample: 1.0,
            seed: 0,
        }
    }
}

impl GbmConfig {
    fn validate(&self) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::InvalidParameter("n_trees must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidParameter(
                "learning_rate must lie in (0, 1]".into(),
            ));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(Error::InvalidParameter("subsample must lie in (0, 1]".into()));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::InvalidParameter("min_samples_leaf must be >= 1".into()));
        }
        Ok(())
    }
}

/// Additive ensemble: base prediction plus learning-rate-scaled trees, each
/// fitted to the residuals left by its predecessors.
#[derive(Debug, Clone)]
pub struct GbmModel {
    base_prediction: f64,
    learning_rate: f64,
    n_features: usize,
    trees: Vec<RegressionTree>,
    /// Training sum of squared errors after each stage.
    training_sse: Vec<f64>,
}

impl GbmModel {
    pub fn base_prediction(&self) -> f64 {
        self.base_prediction
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Training SSE after each boosting stage (index 0 = after the first
    /// tree). Non-increasing when subsample = 1.
    pub fn training_sse(&self) -> &[f64] {
        &self.training_sse
    }
}

/// Fit a boosted regression ensemble. Deterministic given the config seed.
pub fn gbm_fit(features: &EncodedMatrix, target: &[f64], cfg: &GbmConfig) -> Result<GbmModel> {
    cfg.validate()?;
    let n = features.n_rows();
    if n == 0 || target.is_empty() {
        return Err(Error::EmptyInput("gbm_fit needs at least one row".into()));
    }
    if target.len() != n {
        return Err(Error::InvalidParameter(format!(
            "feature rows ({n}) and target length ({}) differ",
            target.len()
        )));
    }
    if target.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("gbm target".into()));
    }

    let base = target.iter().sum::<f64>() / n as f64;
    let mut predictions = vec![base; n];
    let mut residuals = vec![0.0; n];
    let mut trees = Vec::with_capacity(cfg.n_trees);
    let mut training_sse = Vec::with_capacity(cfg.n_trees);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let params = TreeParams {
        max_depth: cfg.max_depth,
        min_samples_leaf: cfg.min_samples_leaf,
    };
    let all_rows: Vec<usize> = (0..n).collect();
    let sample_size = ((n as f64 * cfg.subsample).floor() as usize).max(1);

    for _ in 0..cfg.n_trees {
        for (r, (t, p)) in residuals.iter_mut().zip(target.iter().zip(&predictions)) {
            *r = t - p;
        }
        let rows: Vec<usize> = if sample_size == n {
            all_rows.clone()
        } else {
            let mut shuffled = all_rows.clone();
            shuffled.shuffle(&mut rng);
            shuffled.truncate(sample_size);
            shuffled.sort_unstable();
            shuffled
        };
        let tree = fit_tree(features, &residuals, &rows, &params);
        for (i, p) in predictions.iter_mut().enumerate() {
            *p += cfg.learning_rate * tree.predict_row(features.row(i));
        }
        training_sse.push(
            (0..n)
                .map(|i| {
                    let e = target[i] - predictions[i];
                    e * e
                })
                .sum(),
        );
        trees.push(tree);
    }

    Ok(GbmModel {
        base_prediction: base,
        learning_rate: cfg.learning_rate,
        n_features: features.n_cols(),
        trees,
        training_sse,
    })
}

/// Predict one value per row of `features`.
pub fn gbm_predict(model: &GbmModel, features: &EncodedMatrix) -> Result<Vec<f64>> {
    if features.n_cols() != model.n_features {
        return Err(Error::EncoderMismatch {
            left: model.n_features,
            right: features.n_cols(),
        });
    }
    Ok((0..features.n_rows())
        .map(|i| {
            let row = features.row(i);
            model.base_prediction
                + model.learning_rate
                    * model
                        .trees
                        .iter()
                        .map(|t| t.predict_row(row))
                        .sum::<f64>()
        })
        .collect())
}

/// Coefficient of determination: 1 - sum((y - yhat)^2) / sum((y - ybar)^2).
/// Errors when the true values are constant, which leaves it undefined.
pub fn r_squared(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.is_empty() || y_true.len() != y_pred.len() {
        return Err(Error::InvalidParameter(format!(
            "r_squared needs equal non-empty lengths, got {} and {}",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let u: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(y, p)| (y - p) * (y - p))
        .sum();
    let v: f64 = y_true.iter().map(|y| (y - mean) * (y - mean)).sum();
    if v == 0.0 {
        return Err(Error::UndefinedRSquared);
    }
    Ok(1.0 - u / v)
}

/// The six R-squared values of the evaluation grid. Field names follow the
/// train-source/predict-target convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DownstreamResult {
    pub tr_tr: f64,
    pub tr_syn: f64,
    pub tr_te: f64,
    pub syn_syn: f64,
    pub syn_tr: f64,
    pub syn_te: f64,
}

fn drop_column(table: &DataTable, name: &str) -> Result<DataTable> {
    let schema = table.schema();
    let drop_idx = schema.index_of(name)?;
    let columns = schema
        .columns
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != drop_idx)
        .map(|(_, c)| c.clone())
        .collect();
    let feature_schema = TableSchema {
        columns,
        target: None,
    };
    let rows: Vec<Vec<Cell>> = table
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(i, _)| *i != drop_idx)
                .map(|(_, c)| c.clone())
                .collect()
        })
        .collect();
    DataTable::new(feature_schema, rows)
}

/// Fit one model on `train` and one on `synth` (each with an encoder fitted
/// on its own training source) and evaluate all six combinations.
pub fn downstream_suite(
    train: &DataTable,
    holdout: &DataTable,
    synth: &DataTable,
    target: &str,
    cfg: &GbmConfig,
) -> Result<DownstreamResult> {
    if train.schema() != holdout.schema() || train.schema() != synth.schema() {
        return Err(Error::Schema(
            "downstream suite requires identical schemas across the three tables".into(),
        ));
    }
    train.schema().index_of(target)?;

    let y_tr = train.numeric_column(target)?;
    let y_te = holdout.numeric_column(target)?;
    let y_syn = synth.numeric_column(target)?;

    let f_tr = drop_column(train, target)?;
    let f_te = drop_column(holdout, target)?;
    let f_syn = drop_column(synth, target)?;

    // Real-side model with its own encoder.
    let enc_real = Encoder::fit(&f_tr)?;
    let model_real = gbm_fit(&enc_real.encode(&f_tr)?, &y_tr, cfg)?;
    let tr_tr = r_squared(&y_tr, &gbm_predict(&model_real, &enc_real.encode(&f_tr)?)?)?;
    let tr_syn = r_squared(&y_syn, &gbm_predict(&model_real, &enc_real.encode(&f_syn)?)?)?;
    let tr_te = r_squared(&y_te, &gbm_predict(&model_real, &enc_real.encode(&f_te)?)?)?;

    // Synthetic-side model with an encoder fitted on the synthetic table.
    let enc_syn = Encoder::fit(&f_syn)?;
    let model_syn = gbm_fit(&enc_syn.encode(&f_syn)?, &y_syn, cfg)?;
    let syn_syn = r_squared(&y_syn, &gbm_predict(&model_syn, &enc_syn.encode(&f_syn)?)?)?;
    let syn_tr = r_squared(&y_tr, &gbm_predict(&model_syn, &enc_syn.encode(&f_tr)?)?)?;
    let syn_te = r_squared(&y_te, &gbm_predict(&model_syn, &enc_syn.encode(&f_te)?)?)?;

    Ok(DownstreamResult {
        tr_tr,
        tr_syn,
        tr_te,
        syn_syn,
        syn_tr,
        syn_te,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ColumnKind;

    fn mat(rows: Vec<Vec<f64>>) -> EncodedMatrix {
        EncodedMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn constant_target_predicts_constant() {
        let x = mat(vec![vec![0.0], vec![0.5], vec![1.0]]);
        let y = [7.25, 7.25, 7.25];
        let model = gbm_fit(&x, &y, &GbmConfig::default()).unwrap();
        let preds = gbm_predict(&model, &x).unwrap();
        assert!(preds.iter().all(|&p| p == 7.25));
    }

    #[test]
    fn single_leaf_predicts_mean() {
        let x = mat(vec![vec![0.0], vec![1.0], vec![2.0]]);
        let y = [1.0, 2.0, 6.0];
        let cfg = GbmConfig {
            n_trees: 1,
            learning_rate: 1.0,
            max_depth: 0,
            ..GbmConfig::default()
        };
        let model = gbm_fit(&x, &y, &cfg).unwrap();
        let preds = gbm_predict(&model, &x).unwrap();
        assert!(preds.iter().all(|&p| p == 3.0));
    }

    #[test]
    fn step_function_learned() {
        let xs: Vec<f64> = (-25..25).map(|v| v as f64 / 5.0).collect();
        let x = mat(xs.iter().map(|&v| vec![v]).collect());
        let y: Vec<f64> = xs.iter().map(|&v| if v < 0.0 { 0.0 } else { 1.0 }).collect();
        let cfg = GbmConfig {
            n_trees: 50,
            ..GbmConfig::default()
        };
        let model = gbm_fit(&x, &y, &cfg).unwrap();
        let r2 = r_squared(&y, &gbm_predict(&model, &x).unwrap()).unwrap();
        assert!(r2 >= 0.99, "training r2 {r2}");
    }

    /// Independent stage-wise oracle for 1-D stump boosting: exhaustive
    /// threshold search re-implemented from scratch.
    fn stump_boost_oracle(xs: &[f64], ys: &[f64], n_trees: usize, lr: f64) -> Vec<f64> {
        let n = xs.len();
        let base = ys.iter().sum::<f64>() / n as f64;
        let mut preds = vec![base; n];
        for _ in 0..n_trees {
            let residuals: Vec<f64> = ys.iter().zip(&preds).map(|(y, p)| y - p).collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
            let total: f64 = residuals.iter().sum();
            let mut best: Option<(f64, f64)> = None; // (score, threshold)
            let mut left = 0.0;
            for t in 0..n - 1 {
                left += residuals[order[t]];
                if xs[order[t]] == xs[order[t + 1]] {
                    continue;
                }
                let nl = (t + 1) as f64;
                let nr = (n - t - 1) as f64;
                let score = left * left / nl + (total - left) * (total - left) / nr;
                if best.is_none() || score > best.unwrap().0 {
                    best = Some((score, xs[order[t]]));
                }
            }
            let parent = total * total / n as f64;
            match best {
                Some((score, thr)) if score > parent => {
                    let (mut ls, mut ln, mut rs, mut rn) = (0.0, 0usize, 0.0, 0usize);
                    for i in 0..n {
                        if xs[i] <= thr {
                            ls += residuals[i];
                            ln += 1;
                        } else {
                            rs += residuals[i];
                            rn += 1;
                        }
                    }
                    for i in 0..n {
                        let leaf = if xs[i] <= thr { ls / ln as f64 } else { rs / rn as f64 };
                        preds[i] += lr * leaf;
                    }
                }
                _ => {
                    let mean = total / n as f64;
                    for p in preds.iter_mut() {
                        *p += lr * mean;
                    }
                }
            }
        }
        preds
    }

    #[test]
    fn matches_independent_stump_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(71);
        for _ in 0..5 {
            let n = 40;
            let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let ys: Vec<f64> = xs
                .iter()
                .map(|&v| v.sin() + rng.random_range(-0.05..0.05))
                .collect();
            let cfg = GbmConfig {
                n_trees: 25,
                learning_rate: 0.3,
                max_depth: 1,
                ..GbmConfig::default()
            };
            let x = mat(xs.iter().map(|&v| vec![v]).collect());
            let model = gbm_fit(&x, &ys, &cfg).unwrap();
            let got = gbm_predict(&model, &x).unwrap();
            let expected = stump_boost_oracle(&xs, &ys, 25, 0.3);
            for (g, e) in got.iter().zip(&expected) {
                assert!((g - e).abs() < 1e-9, "{g} vs {e}");
            }
        }
    }

    #[test]
    fn training_loss_non_increasing() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(73);
        for trial in 0..10 {
            let n = 60;
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
                .collect();
            let ys: Vec<f64> = rows
                .iter()
                .map(|r| 3.0 * r[0] - r[1] * r[1] + rng.random_range(-0.1..0.1))
                .collect();
            let model = gbm_fit(&mat(rows), &ys, &GbmConfig::default()).unwrap();
            let sse = model.training_sse();
            assert_eq!(sse.len(), 100);
            for w in sse.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "trial {trial}: loss rose {w:?}");
            }
        }
    }

    #[test]
    fn fit_is_bit_deterministic() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(79);
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| vec![rng.random_range(0.0..1.0); 3])
            .collect();
        let ys: Vec<f64> = (0..50).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cfg = GbmConfig {
            subsample: 0.7,
            seed: 99,
            ..GbmConfig::default()
        };
        let x = mat(rows);
        let a = gbm_predict(&gbm_fit(&x, &ys, &cfg).unwrap(), &x).unwrap();
        let b = gbm_predict(&gbm_fit(&x, &ys, &cfg).unwrap(), &x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_and_nonfinite_rejected() {
        let x = mat(vec![vec![0.0]]);
        assert!(gbm_fit(&x, &[f64::NAN], &GbmConfig::default()).is_err());
        let empty = EncodedMatrix::from_rows(vec![]).unwrap();
        assert!(gbm_fit(&empty, &[], &GbmConfig::default()).is_err());
    }

    #[test]
    fn predict_width_checked() {
        let x = mat(vec![vec![0.0], vec![1.0]]);
        let model = gbm_fit(&x, &[0.0, 1.0], &GbmConfig::default()).unwrap();
        let wide = mat(vec![vec![0.0, 1.0]]);
        assert!(matches!(
            gbm_predict(&model, &wide).unwrap_err(),
            Error::EncoderMismatch { .. }
        ));
    }

    #[test]
    fn r_squared_cases() {
        assert_eq!(r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        let y = [1.0, 2.0, 3.0];
        assert_eq!(r_squared(&y, &[2.0, 2.0, 2.0]).unwrap(), 0.0);
        assert_eq!(r_squared(&y, &[1.0, 2.0, 4.0]).unwrap(), 0.5);
        assert!(matches!(
            r_squared(&[5.0, 5.0], &[5.0, 5.0]).unwrap_err(),
            Error::UndefinedRSquared
        ));
        assert!(r_squared(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn r_squared_shift_and_scale_invariance() {
        let y = [1.0, 2.0, 3.0, 5.0];
        let p = [1.1, 2.2, 2.9, 4.8];
        let base = r_squared(&y, &p).unwrap();
        let shifted: (Vec<f64>, Vec<f64>) = (
            y.iter().map(|v| v + 11.0).collect(),
            p.iter().map(|v| v + 11.0).collect(),
        );
        assert!((r_squared(&shifted.0, &shifted.1).unwrap() - base).abs() < 1e-12);
        let scaled: (Vec<f64>, Vec<f64>) = (
            y.iter().map(|v| v * 4.0).collect(),
            p.iter().map(|v| v * 4.0).collect(),
        );
        assert!((r_squared(&scaled.0, &scaled.1).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn model_depends_only_on_its_inputs() {
        // Interface purity: the fitted model is a function of (features,
        // target, config) alone, so predictions cannot change when other
        // tables change.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(83);
        let x = mat((0..30).map(|_| vec![rng.random_range(0.0..1.0)]).collect());
        let y: Vec<f64> = (0..30).map(|_| rng.random_range(0.0..1.0)).collect();
        let cfg = GbmConfig::default();
        let before = gbm_predict(&gbm_fit(&x, &y, &cfg).unwrap(), &x).unwrap();
        // "Other data" that a leaky implementation might consult.
        let _decoy = mat((0..30).map(|_| vec![rng.random_range(5.0..9.0)]).collect());
        let after = gbm_predict(&gbm_fit(&x, &y, &cfg).unwrap(), &x).unwrap();
        assert_eq!(before, after);
    }

    fn toy_table(n: usize, seed: u64) -> DataTable {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let schema = TableSchema::new(
            vec![
                ("zone".into(), ColumnKind::Categorical),
                ("distance".into(), ColumnKind::Float),
                ("total".into(), ColumnKind::Float),
            ],
            Some("total".into()),
        )
        .unwrap();
        let rows = (0..n)
            .map(|_| {
                let zone = if rng.random_bool(0.5) { "A" } else { "B" };
                let dist: f64 = rng.random_range(0.5..10.0);
                let total = 2.5 + 1.8 * dist + if zone == "A" { 1.0 } else { 0.0 };
                vec![
                    Cell::Cat(zone.into()),
                    Cell::Float(dist),
                    Cell::Float(total),
                ]
            })
            .collect();
        DataTable::new(schema, rows).unwrap()
    }

    #[test]
    fn suite_with_synth_equal_train() {
        let train = toy_table(80, 1);
        let holdout = toy_table(40, 2);
        let result = downstream_suite(&train, &holdout, &train, "total", &GbmConfig::default())
            .unwrap();
        assert!((result.tr_syn - result.tr_tr).abs() < 1e-9);
        assert!((result.syn_te - result.tr_te).abs() < 1e-9);
        assert!((result.syn_syn - result.tr_tr).abs() < 1e-9);
    }

    #[test]
    fn suite_missing_target() {
        let train = toy_table(10, 1);
        let err = downstream_suite(&train, &train, &train, "nope", &GbmConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::NoSuchColumn(_)));
    }
}
