//! The experiment runner: repeated fit/sample loops, metric computation and
//! aggregation.

use std::collections::BTreeMap;

use rand::SeedableRng;

use crate::baselines::{fit_generator, sample};
use crate::coverage::coverage;
use crate::data::{
    load_csv, preprocess_trips, split, DataTable, EncodedMatrix, Encoder, TableSchema,
};
use crate::downstream::{downstream_suite, gbm_fit, gbm_predict, r_squared};
use crate::error::{Error, Result};
use crate::graph::{build_graph, edge_distribution, graph_similarity, EdgeDistribution};
use crate::harness::config::{ExperimentConfig, GeneratorEntry};
use crate::harness::report::{
    GeneratorReport, MetricAggregate, MetricReport, RunSeeds, SweepAggregate,
};
use crate::harness::seed::derive_seed;
use crate::ot::{wasserstein, OtConfig, SolverPath};
use crate::privacy::{dcr_profile, percentile, rdcr, rdcr_sweep, RdcrFlag};

/// Load the dataset named by the config, preprocess, split and run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<MetricReport> {
    cfg.validate()?;
    let schema = TableSchema::from_json_file(&cfg.schema)?;
    let raw = load_csv(&cfg.real_csv, &schema)?;
    let (table, _) = preprocess_trips(&raw, &cfg.preprocess)?;
    let (train, holdout) = split(&table, &cfg.split)?;
    run_prepared(cfg, &train, &holdout)
}

/// Run the experiment on already prepared train/holdout tables.
pub fn run_prepared(
    cfg: &ExperimentConfig,
    train: &DataTable,
    holdout: &DataTable,
) -> Result<MetricReport> {
    cfg.validate()?;
    if train.schema() != holdout.schema() {
        return Err(Error::Schema("train and holdout schemas differ".into()));
    }
    let shared = SharedInputs::prepare(cfg, train, holdout)?;
    let reference = shared.reference_values(cfg)?;

    let mut generators = Vec::with_capacity(cfg.generators.len());
    for entry in &cfg.generators {
        let name = entry.name();
        let report = match evaluate_generator(cfg, &shared, entry) {
            Ok(report) => report,
            Err(err) => GeneratorReport {
                name,
                error: Some(err.to_string()),
                ..GeneratorReport::default()
            },
        };
        generators.push(report);
    }

    Ok(MetricReport {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        embedding: "one-hot categorical + min-max numeric to [0,1], L2 ground metric, \
                    encoder fitted on the train split"
            .to_string(),
        config: cfg.clone(),
        reference,
        generators,
    })
}

/// Inputs shared by every generator run, computed once.
struct SharedInputs<'a> {
    train: &'a DataTable,
    holdout: &'a DataTable,
    encoder: Encoder,
    enc_train: EncodedMatrix,
    enc_holdout: EncodedMatrix,
    /// Row-capped views for the quadratic metrics (coverage, DCR).
    capped_train: EncodedMatrix,
    capped_holdout: EncodedMatrix,
    /// Train-side OD edge distribution when zone columns are configured.
    train_edges: Option<EdgeDistribution>,
    holdout_edges: Option<EdgeDistribution>,
}

impl<'a> SharedInputs<'a> {
    fn prepare(cfg: &ExperimentConfig, train: &'a DataTable, holdout: &'a DataTable) -> Result<Self> {
        let encoder = Encoder::fit(train)?;
        let enc_train = encoder.encode(train)?;
        let enc_holdout = encoder.encode(holdout)?;
        let capped_train = cap_rows(
            &enc_train,
            cfg.metric_row_cap,
            derive_seed(cfg.master_seed, "shared", 0, 0, "cap-train"),
        );
        let capped_holdout = cap_rows(
            &enc_holdout,
            cfg.metric_row_cap,
            derive_seed(cfg.master_seed, "shared", 0, 0, "cap-holdout"),
        );
        let (train_edges, holdout_edges) = match &cfg.zone_columns {
            Some(zones) => {
                let mut g_train = build_graph(train, &zones.pickup, &zones.dropoff)?;
                let mut g_holdout = build_graph(holdout, &zones.pickup, &zones.dropoff)?;
                if zones.exclude_self_loops {
                    g_train = g_train.without_self_loops()?;
                    g_holdout = g_holdout.without_self_loops()?;
                }
                (
                    Some(edge_distribution(&g_train)?),
                    Some(edge_distribution(&g_holdout)?),
                )
            }
            None => (None, None),
        };
        Ok(SharedInputs {
            train,
            holdout,
            encoder,
            enc_train,
            enc_holdout,
            capped_train,
            capped_holdout,
            train_edges,
            holdout_edges,
        })
    }

    /// The no-synthetic-data baseline columns.
    fn reference_values(&self, cfg: &ExperimentConfig) -> Result<BTreeMap<String, f64>> {
        let mut reference = BTreeMap::new();
        let ot_cfg = OtConfig {
            seed: derive_seed(cfg.master_seed, "reference", 0, 0, "ot"),
            ..cfg.ot.clone()
        };
        reference.insert(
            "w1_tr_te".to_string(),
            wasserstein(&self.enc_train, &self.enc_holdout, &ot_cfg)?.distance,
        );
        reference.insert(
            "cov_tr_te".to_string(),
            coverage(&self.capped_train, &self.capped_holdout, &cfg.coverage)?,
        );
        if let (Some(tr), Some(te)) = (&self.train_edges, &self.holdout_edges) {
            reference.insert("G_tr_te".to_string(), graph_similarity(tr, te));
        }
        if let Some(target) = self.train.schema().target.clone() {
            let (tr_tr, tr_te) = train_side_r2(self.train, self.holdout, &target, cfg)?;
            reference.insert("dwn_tr_tr".to_string(), tr_tr);
            reference.insert("dwn_tr_te".to_string(), tr_te);
        }
        Ok(reference)
    }
}

/// R^2 of the train-fitted model on train and holdout, without any synthetic
/// table involved.
fn train_side_r2(
    train: &DataTable,
    holdout: &DataTable,
    target: &str,
    cfg: &ExperimentConfig,
) -> Result<(f64, f64)> {
    let f_train = feature_table(train, target)?;
    let f_holdout = feature_table(holdout, target)?;
    let enc = Encoder::fit(&f_train)?;
    let y_train = train.numeric_column(target)?;
    let y_holdout = holdout.numeric_column(target)?;
    let model = gbm_fit(&enc.encode(&f_train)?, &y_train, &cfg.gbm)?;
    let tr_tr = r_squared(&y_train, &gbm_predict(&model, &enc.encode(&f_train)?)?)?;
    let tr_te = r_squared(&y_holdout, &gbm_predict(&model, &enc.encode(&f_holdout)?)?)?;
    Ok((tr_tr, tr_te))
}

fn feature_table(table: &DataTable, target: &str) -> Result<DataTable> {
    let schema = table.schema();
    let drop_idx = schema.index_of(target)?;
    let columns = schema
        .columns
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != drop_idx)
        .map(|(_, c)| c.clone())
        .collect();
    let rows = table
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
    DataTable::new(
        TableSchema {
            columns,
            target: None,
        },
        rows,
    )
}

fn cap_rows(matrix: &EncodedMatrix, cap: usize, seed: u64) -> EncodedMatrix {
    if matrix.n_rows() <= cap {
        return matrix.clone();
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut indices = rand::seq::index::sample(&mut rng, matrix.n_rows(), cap).into_vec();
    indices.sort_unstable();
    matrix.select_rows(&indices)
}

/// Values measured for one synthetic sample.
struct RunOutcome {
    values: BTreeMap<&'static str, f64>,
    sweep: Vec<(f64, f64, f64, f64)>, // alpha, d_rs, d_hs, ratio
    solver_path: String,
    notes: Vec<String>,
}

fn evaluate_generator(
    cfg: &ExperimentConfig,
    shared: &SharedInputs,
    entry: &GeneratorEntry,
) -> Result<GeneratorReport> {
    let name = entry.name();
    let mut runs: BTreeMap<&'static str, Vec<f64>> = BTreeMap::new();
    let mut sweep_rows: BTreeMap<String, Vec<(f64, f64, f64, f64)>> = BTreeMap::new();
    let mut solver_paths = Vec::new();
    let mut seeds = Vec::new();
    let mut notes = Vec::new();

    let record = |outcome: RunOutcome,
                      runs: &mut BTreeMap<&'static str, Vec<f64>>,
                      sweep_rows: &mut BTreeMap<String, Vec<(f64, f64, f64, f64)>>,
                      solver_paths: &mut Vec<String>,
                      notes: &mut Vec<String>| {
        for (key, value) in outcome.values {
            runs.entry(key).or_default().push(value);
        }
        for row in outcome.sweep {
            // Keyed by the printed alpha so float grids stay stable.
            sweep_rows.entry(format!("{}", row.0)).or_default().push(row);
        }
        solver_paths.push(outcome.solver_path);
        notes.extend(outcome.notes);
    };

    match entry {
        GeneratorEntry::Baseline(spec) => {
            for fit_index in 0..cfg.fits_per_model {
                let generator = fit_generator(shared.train, spec)?;
                for sample_index in 0..cfg.samples_per_fit {
                    let run_seeds = RunSeeds {
                        fit_index,
                        sample_index,
                        sample_seed: derive_seed(
                            cfg.master_seed,
                            &name,
                            fit_index,
                            sample_index,
                            "sample",
                        ),
                        ot_seed: derive_seed(cfg.master_seed, &name, fit_index, sample_index, "ot"),
                        cap_seed: derive_seed(cfg.master_seed, &name, fit_index, sample_index, "cap"),
                    };
                    let synth = sample(&generator, cfg.sample_size, run_seeds.sample_seed)?;
                    let outcome = evaluate_sample(cfg, shared, &synth, &run_seeds)?;
                    record(outcome, &mut runs, &mut sweep_rows, &mut solver_paths, &mut notes);
                    seeds.push(run_seeds);
                }
            }
        }
        GeneratorEntry::External { files, .. } => {
            notes.push(format!(
                "external sample files: std spans the {} provided file(s), not a fit/sample protocol",
                files.len()
            ));
            for (i, file) in files.iter().enumerate() {
                let synth = load_csv(file, shared.train.schema())?;
                if synth.has_missing() {
                    return Err(Error::Schema(format!(
                        "external file {} contains missing or unparseable cells",
                        file.display()
                    )));
                }
                let run_seeds = RunSeeds {
                    fit_index: 0,
                    sample_index: i,
                    sample_seed: 0,
                    ot_seed: derive_seed(cfg.master_seed, &name, 0, i, "ot"),
                    cap_seed: derive_seed(cfg.master_seed, &name, 0, i, "cap"),
                };
                let outcome = evaluate_sample(cfg, shared, &synth, &run_seeds)?;
                record(outcome, &mut runs, &mut sweep_rows, &mut solver_paths, &mut notes);
                seeds.push(run_seeds);
            }
        }
    }

    let metrics = runs
        .into_iter()
        .map(|(key, values)| (key.to_string(), MetricAggregate::from_runs(values)))
        .collect();
    let mut sweep: Vec<SweepAggregate> = Vec::new();
    for alpha in &cfg.sweep_alphas {
        if let Some(rows) = sweep_rows.get(&format!("{alpha}")) {
            let ratio = MetricAggregate::from_runs(rows.iter().map(|r| r.3).collect());
            sweep.push(SweepAggregate {
                alpha: *alpha,
                d_rs_mean: rows.iter().map(|r| r.1).sum::<f64>() / rows.len() as f64,
                d_hs_mean: rows.iter().map(|r| r.2).sum::<f64>() / rows.len() as f64,
                ratio_mean: ratio.mean,
                ratio_std: ratio.std,
            });
        }
    }

    Ok(GeneratorReport {
        name,
        error: None,
        metrics,
        sweep,
        solver_paths,
        seeds,
        notes,
    })
}

/// All metrics for one synthetic table against the shared inputs.
fn evaluate_sample(
    cfg: &ExperimentConfig,
    shared: &SharedInputs,
    synth: &DataTable,
    run_seeds: &RunSeeds,
) -> Result<RunOutcome> {
    if synth.schema() != shared.train.schema() {
        return Err(Error::Schema(
            "synthetic table schema does not match the training schema".into(),
        ));
    }
    let mut values: BTreeMap<&'static str, f64> = BTreeMap::new();
    let mut notes = Vec::new();

    let enc_synth = shared.encoder.encode(synth)?;
    let capped_synth = cap_rows(&enc_synth, cfg.metric_row_cap, run_seeds.cap_seed);

    // Similarity.
    let ot_cfg = OtConfig {
        seed: run_seeds.ot_seed,
        ..cfg.ot.clone()
    };
    let w_tr = wasserstein(&shared.enc_train, &enc_synth, &ot_cfg)?;
    let w_te = wasserstein(&shared.enc_holdout, &enc_synth, &ot_cfg)?;
    values.insert("w1_tr_syn", w_tr.distance);
    values.insert("w1_te_syn", w_te.distance);
    let solver_path = match (w_tr.path, w_te.path) {
        (SolverPath::Exact, SolverPath::Exact) => "exact",
        (SolverPath::Sinkhorn, SolverPath::Sinkhorn) => "sinkhorn",
        _ => "mixed",
    }
    .to_string();

    // Diversity.
    values.insert(
        "cov_tr_syn",
        coverage(&shared.capped_train, &capped_synth, &cfg.coverage)?,
    );
    values.insert(
        "cov_te_syn",
        coverage(&shared.capped_holdout, &capped_synth, &cfg.coverage)?,
    );

    // Privacy.
    let profile = dcr_profile(&shared.capped_train, &shared.capped_holdout, &capped_synth)?;
    values.insert("dcr_rs", percentile(&profile.rs, cfg.rdcr_alpha)?);
    values.insert("dcr_hs", percentile(&profile.hs, cfg.rdcr_alpha)?);
    values.insert("dcr_rr", percentile(&profile.rr, cfg.rdcr_alpha)?);
    values.insert("dcr_ss", percentile(&profile.ss, cfg.rdcr_alpha)?);
    let headline = rdcr(&profile, cfg.rdcr_alpha)?;
    match headline.flag {
        RdcrFlag::Ok | RdcrFlag::DegenerateBothZero => {
            values.insert("rdcr", headline.ratio);
            if headline.flag == RdcrFlag::DegenerateBothZero {
                notes.push(format!(
                    "fit {} sample {}: rdcr degenerate (both percentiles zero), reported as 1",
                    run_seeds.fit_index, run_seeds.sample_index
                ));
            }
        }
        RdcrFlag::InfiniteHsZero => notes.push(format!(
            "fit {} sample {}: rdcr is +infinity (holdout percentile is zero); run excluded from the numeric aggregate",
            run_seeds.fit_index, run_seeds.sample_index
        )),
    }
    let mut sweep = Vec::with_capacity(cfg.sweep_alphas.len());
    for r in rdcr_sweep(&profile, &cfg.sweep_alphas)? {
        sweep.push((r.alpha, r.d_rs, r.d_hs, r.ratio));
    }

    // Downstream utility.
    if let Some(target) = shared.train.schema().target.clone() {
        let result = downstream_suite(shared.train, shared.holdout, synth, &target, &cfg.gbm)?;
        values.insert("dwn_tr_tr", result.tr_tr);
        values.insert("dwn_tr_syn", result.tr_syn);
        values.insert("dwn_tr_te", result.tr_te);
        values.insert("dwn_syn_syn", result.syn_syn);
        values.insert("dwn_syn_tr", result.syn_tr);
        values.insert("dwn_syn_te", result.syn_te);
    }

    // Graph structure.
    if let Some(zones) = &cfg.zone_columns {
        let mut g_synth = build_graph(synth, &zones.pickup, &zones.dropoff)?;
        if zones.exclude_self_loops {
            g_synth = g_synth.without_self_loops()?;
        }
        let synth_edges = edge_distribution(&g_synth)?;
        if let (Some(tr), Some(te)) = (&shared.train_edges, &shared.holdout_edges) {
            values.insert("G_tr_syn", graph_similarity(tr, &synth_edges));
            values.insert("G_te_syn", graph_similarity(te, &synth_edges));
        }
    }

    Ok(RunOutcome {
        values,
        sweep,
        solver_path,
        notes,
    })
}

/// The tr/te reference columns on their own, as a standalone operation.
pub fn reference_baselines(
    train: &DataTable,
    holdout: &DataTable,
    cfg: &ExperimentConfig,
) -> Result<BTreeMap<String, f64>> {
    let shared = SharedInputs::prepare(cfg, train, holdout)?;
    shared.reference_values(cfg)
}
