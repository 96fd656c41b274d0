//! Experiment orchestration: config, seeded protocol runs, aggregation and
//! report rendering.

mod config;
mod report;
mod run;
mod seed;

pub use config::{ExperimentConfig, GeneratorEntry, ZoneColumns};
pub use report::{
    render_report, sweep_csv, GeneratorReport, MetricAggregate, MetricReport, ReportFormat,
    RunSeeds, SweepAggregate,
};
pub use run::{reference_baselines, run_experiment, run_prepared};
pub use seed::derive_seed;
