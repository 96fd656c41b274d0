//! Experiment configuration, loadable from JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::GeneratorSpec;
use crate::coverage::CoverageConfig;
use crate::data::{PreprocessSpec, SplitSpec};
use crate::downstream::GbmConfig;
use crate::error::{Error, Result};
use crate::ot::OtConfig;
use crate::privacy::DEFAULT_SWEEP_ALPHAS;

/// One generator under evaluation: either a built-in baseline or a set of
/// pre-drawn synthetic CSV files from an external model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorEntry {
    Baseline(GeneratorSpec),
    External { name: String, files: Vec<PathBuf> },
}

impl GeneratorEntry {
    pub fn name(&self) -> String {
        match self {
            GeneratorEntry::Baseline(spec) => spec.kind.name().to_string(),
            GeneratorEntry::External { name, .. } => name.clone(),
        }
    }
}

/// Zone columns for the graph metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneColumns {
    pub pickup: String,
    pub dropoff: String,
    /// Drop same-zone trips before scoring.
    #[serde(default)]
    pub exclude_self_loops: bool,
}

/// Full experimental protocol: dataset, split, generators, metric settings
/// and the master seed every run seed derives from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub real_csv: PathBuf,
    pub schema: PathBuf,
    #[serde(default)]
    pub preprocess: PreprocessSpec,
    #[serde(default = "default_split")]
    pub split: SplitSpec,
    pub generators: Vec<GeneratorEntry>,
    #[serde(default = "default_fits")]
    pub fits_per_model: usize,
    #[serde(default = "default_samples")]
    pub samples_per_fit: usize,
    #[serde(default = "default_sample_size")]
    pub sample_size: usize,
    #[serde(default)]
    pub ot: OtConfig,
    #[serde(default)]
    pub coverage: CoverageConfig,
    #[serde(default)]
    pub gbm: GbmConfig,
    /// Percentile used for the headline DCR table.
    #[serde(default = "default_rdcr_alpha")]
    pub rdcr_alpha: f64,
    /// Percentile grid for the sweep plot data.
    #[serde(default = "default_sweep_alphas")]
    pub sweep_alphas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zone_columns: Option<ZoneColumns>,
    /// Coverage and DCR computations cap every input to this many rows.
    #[serde(default = "default_row_cap")]
    pub metric_row_cap: usize,
    #[serde(default)]
    pub master_seed: u64,
}

fn default_split() -> SplitSpec {
    SplitSpec {
        train_size: 40_000,
        holdout_size: 20_000,
        seed: 0,
    }
}

fn default_fits() -> usize {
    3
}

fn default_samples() -> usize {
    5
}

fn default_sample_size() -> usize {
    20_000
}

fn default_rdcr_alpha() -> f64 {
    5.0
}

fn default_sweep_alphas() -> Vec<f64> {
    DEFAULT_SWEEP_ALPHAS.to_vec()
}

fn default_row_cap() -> usize {
    20_000
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fits_per_model * self.samples_per_fit < 1 {
            return Err(Error::Config(
                "fits_per_model x samples_per_fit must be >= 1".into(),
            ));
        }
        if self.sample_size < 1 {
            return Err(Error::Config("sample_size must be >= 1".into()));
        }
        if self.generators.is_empty() {
            return Err(Error::Config("at least one generator is required".into()));
        }
        if !(self.rdcr_alpha > 0.0 && self.rdcr_alpha <= 100.0) {
            return Err(Error::Config("rdcr_alpha must lie in (0, 100]".into()));
        }
        for entry in &self.generators {
            if let GeneratorEntry::External { name, files } = entry {
                if files.is_empty() {
                    return Err(Error::Config(format!(
                        "external generator {name:?} lists no files"
                    )));
                }
            }
        }
        Ok(())
    }
}
