//! Aggregated metric reports and their renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;

/// Mean/std over the per-run values, which stay attached for traceability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricAggregate {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single run.
    pub std: f64,
    pub run_count: usize,
    pub runs: Vec<f64>,
}

impl MetricAggregate {
    pub fn from_runs(runs: Vec<f64>) -> Self {
        let n = runs.len();
        let mean = runs.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (runs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        MetricAggregate {
            mean,
            std,
            run_count: n,
            runs,
        }
    }
}

/// Seeds used by one run, for the provenance block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSeeds {
    pub fit_index: usize,
    pub sample_index: usize,
    pub sample_seed: u64,
    pub ot_seed: u64,
    pub cap_seed: u64,
}

/// Mean sweep row across runs at one percentile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAggregate {
    pub alpha: f64,
    pub d_rs_mean: f64,
    pub d_hs_mean: f64,
    pub ratio_mean: f64,
    pub ratio_std: f64,
}

/// Everything measured for one generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct GeneratorReport {
    pub name: String,
    /// Set when the generator's runs aborted; other generators continue.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub metrics: BTreeMap<String, MetricAggregate>,
    #[serde(default)]
    pub sweep: Vec<SweepAggregate>,
    /// Wasserstein solver path per run ("exact" / "sinkhorn").
    #[serde(default)]
    pub solver_paths: Vec<String>,
    #[serde(default)]
    pub seeds: Vec<RunSeeds>,
    #[serde(default)]
    pub notes: Vec<String>,
}

/// Full experiment output: provenance, reference values, per-generator
/// aggregates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub toolkit_version: String,
    /// How rows were embedded for the distance metrics.
    pub embedding: String,
    pub config: ExperimentConfig,
    /// Baselines that involve no synthetic data (tr/te columns).
    pub reference: BTreeMap<String, f64>,
    pub generators: Vec<GeneratorReport>,
}

/// Output renderings of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::InvalidParameter(format!(
                "unknown report format {other:?} (expected json, markdown or csv)"
            ))),
        }
    }
}

/// One metric family rendered as a markdown table.
struct Family {
    title: &'static str,
    /// (column header, metric key, is reference column)
    columns: &'static [(&'static str, &'static str, bool)],
    scale: f64,
    decimals: usize,
}

const FAMILIES: [Family; 5] = [
    Family {
        title: "Downstream R^2 (x100)",
        columns: &[
            ("dwn_tr_tr", "dwn_tr_tr", true),
            ("dwn_tr_syn", "dwn_tr_syn", false),
            ("dwn_tr_te", "dwn_tr_te", true),
            ("dwn_syn_syn", "dwn_syn_syn", false),
            ("dwn_syn_tr", "dwn_syn_tr", false),
            ("dwn_syn_te", "dwn_syn_te", false),
        ],
        scale: 100.0,
        decimals: 2,
    },
    Family {
        title: "Wasserstein distance",
        columns: &[
            ("w1_tr_te", "w1_tr_te", true),
            ("w1_tr_syn", "w1_tr_syn", false),
            ("w1_te_syn", "w1_te_syn", false),
        ],
        scale: 1.0,
        decimals: 4,
    },
    Family {
        title: "Graph similarity (x100)",
        columns: &[
            ("G_tr_te", "G_tr_te", true),
            ("G_tr_syn", "G_tr_syn", false),
            ("G_te_syn", "G_te_syn", false),
        ],
        scale: 100.0,
        decimals: 2,
    },
    Family {
        title: "Coverage (x100)",
        columns: &[
            ("cov_tr_te", "cov_tr_te", true),
            ("cov_tr_syn", "cov_tr_syn", false),
            ("cov_te_syn", "cov_te_syn", false),
        ],
        scale: 100.0,
        decimals: 2,
    },
    Family {
        title: "Distance to closest record (percentile in config)",
        columns: &[
            ("dcr_rs", "dcr_rs", false),
            ("dcr_hs", "dcr_hs", false),
            ("rDCR", "rdcr", false),
            ("dcr_rr", "dcr_rr", false),
            ("dcr_ss", "dcr_ss", false),
        ],
        scale: 1.0,
        decimals: 3,
    },
];

/// "mean (std)" cell, scaled.
fn cell(agg: &MetricAggregate, scale: f64, decimals: usize) -> String {
    format!(
        "{:.dec$} ({:.dec$})",
        agg.mean * scale,
        agg.std * scale,
        dec = decimals
    )
}

/// Render the report in the chosen format.
pub fn render_report(report: &MetricReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            serde_json::to_string_pretty(report).map_err(|e| Error::Config(e.to_string()))
        }
        ReportFormat::Markdown => Ok(render_markdown(report)),
        ReportFormat::Csv => Ok(render_csv(report)),
    }
}

fn render_markdown(report: &MetricReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# tripeval report");
    let _ = writeln!(out);
    let _ = writeln!(out, "- toolkit: {}", report.toolkit_version);
    let _ = writeln!(out, "- embedding: {}", report.embedding);
    let _ = writeln!(
        out,
        "- runs per generator: {} fits x {} samples",
        report.config.fits_per_model, report.config.samples_per_fit
    );
    let _ = writeln!(out, "- rdcr percentile: {}", report.config.rdcr_alpha);

    for family in &FAMILIES {
        let present = report
            .generators
            .iter()
            .any(|g| family.columns.iter().any(|(_, key, _)| g.metrics.contains_key(*key)))
            || family
                .columns
                .iter()
                .any(|(_, key, is_ref)| *is_ref && report.reference.contains_key(*key));
        let _ = writeln!(out);
        let _ = writeln!(out, "## {}", family.title);
        let _ = writeln!(out);
        if !present {
            let _ = writeln!(out, "_not applicable for this run_");
            continue;
        }
        let headers: Vec<&str> = family.columns.iter().map(|(h, _, _)| *h).collect();
        let _ = writeln!(out, "| model | {} |", headers.join(" | "));
        let _ = writeln!(out, "|---{}|", "|---".repeat(headers.len()));
        for generator in &report.generators {
            if generator.error.is_some() {
                continue;
            }
            let mut cells = Vec::with_capacity(family.columns.len());
            for (_, key, is_ref) in family.columns {
                let text = match generator.metrics.get(*key) {
                    Some(agg) => cell(agg, family.scale, family.decimals),
                    None if *is_ref => report
                        .reference
                        .get(*key)
                        .map(|v| {
                            format!("{:.dec$} (0.{zeros})", v * family.scale, dec = family.decimals, zeros = "0".repeat(family.decimals))
                        })
                        .unwrap_or_else(|| "n/a".to_string()),
                    None => "n/a".to_string(),
                };
                cells.push(text);
            }
            let _ = writeln!(out, "| {} | {} |", generator.name, cells.join(" | "));
        }
    }

    let failed: Vec<&GeneratorReport> = report
        .generators
        .iter()
        .filter(|g| g.error.is_some())
        .collect();
    if !failed.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "## Failed generators");
        let _ = writeln!(out);
        for g in failed {
            let _ = writeln!(out, "- {}: {}", g.name, g.error.as_deref().unwrap_or(""));
        }
    }
    out
}

fn render_csv(report: &MetricReport) -> String {
    let mut out = String::from("generator,metric,mean,std,run_count\n");
    for (key, value) in &report.reference {
        let _ = writeln!(out, "reference,{key},{value},0,1");
    }
    for generator in &report.generators {
        for (key, agg) in &generator.metrics {
            let _ = writeln!(
                out,
                "{},{key},{},{},{}",
                generator.name, agg.mean, agg.std, agg.run_count
            );
        }
        for row in &generator.sweep {
            let _ = writeln!(
                out,
                "{},rdcr@{},{},{},{}",
                generator.name, row.alpha, row.ratio_mean, row.ratio_std, generator.seeds.len()
            );
        }
    }
    out
}

/// Sweep plot data for one generator: `alpha,d_rs,d_hs,ratio` rows of mean
/// values across runs.
pub fn sweep_csv(generator: &GeneratorReport) -> String {
    let mut out = String::from("alpha,d_rs,d_hs,ratio\n");
    for row in &generator.sweep {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.alpha, row.d_rs_mean, row.d_hs_mean, row.ratio_mean
        );
    }
    out
}
