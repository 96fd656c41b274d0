//! Distance-to-closest-record statistics and the percentile DCR ratio.
//!
//! Four nearest-neighbor distance profiles are computed in the shared
//! encoded space: training rows to synthetic rows (`rs`), holdout rows to
//! synthetic rows (`hs`), training rows to other training rows (`rr`) and
//! synthetic rows to other synthetic rows (`ss`). The ratio of the
//! alpha-percentile of `rs` to that of `hs` is the privacy signal: a ratio
//! below one means the tail of the training set sits closer to the
//! synthetic data than fresh holdout data does, which is exactly what a
//! distance-based membership inference attacker exploits.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::EncodedMatrix;
use crate::distance::l2;
use crate::error::{Error, Result};

/// Sorted nearest-neighbor distance arrays for the four DCR variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcrProfile {
    /// Per-training-row distance to the nearest synthetic row, ascending.
    pub rs: Vec<f64>,
    /// Per-holdout-row distance to the nearest synthetic row, ascending.
    pub hs: Vec<f64>,
    /// Per-training-row distance to the nearest other training row.
    pub rr: Vec<f64>,
    /// Per-synthetic-row distance to the nearest other synthetic row.
    pub ss: Vec<f64>,
}

impl DcrProfile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let profile: DcrProfile =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("profile: {e}")))?;
        for (name, list) in [
            ("rs", &profile.rs),
            ("hs", &profile.hs),
            ("rr", &profile.rr),
            ("ss", &profile.ss),
        ] {
            if list.is_empty() {
                return Err(Error::EmptyInput(format!("profile list {name} is empty")));
            }
            if list.windows(2).any(|w| w[0] > w[1]) || list.iter().any(|v| !v.is_finite() || *v < 0.0)
            {
                return Err(Error::Config(format!(
                    "profile list {name} must be sorted, finite and non-negative"
                )));
            }
        }
        Ok(profile)
    }
}

/// Distance from each query row to the nearest row of `targets`, skipping
/// the same index when both views alias one set.
fn nearest_distances(queries: &EncodedMatrix, targets: &EncodedMatrix, skip_self: bool) -> Vec<f64> {
    let mut out: Vec<f64> = (0..queries.n_rows())
        .into_par_iter()
        .map(|i| {
            let q = queries.row(i);
            let mut best = f64::INFINITY;
            for j in 0..targets.n_rows() {
                if skip_self && i == j {
                    continue;
                }
                let d = l2(q, targets.row(j));
                if d < best {
                    best = d;
                }
            }
            best
        })
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    out
}

/// Compute all four DCR arrays. Every set needs at least two rows so the
/// self-excluding variants stay defined.
pub fn dcr_profile(
    train: &EncodedMatrix,
    holdout: &EncodedMatrix,
    synth: &EncodedMatrix,
) -> Result<DcrProfile> {
    for (name, set) in [("train", train), ("holdout", holdout), ("synth", synth)] {
        if set.n_cols() != train.n_cols() {
            return Err(Error::EncoderMismatch {
                left: train.n_cols(),
                right: set.n_cols(),
            });
        }
        if set.n_rows() < 2 {
            return Err(Error::EmptyInput(format!(
                "dcr profile needs >= 2 rows in every set, {name} has {}",
                set.n_rows()
            )));
        }
    }
    Ok(DcrProfile {
        rs: nearest_distances(train, synth, false),
        hs: nearest_distances(holdout, synth, false),
        rr: nearest_distances(train, train, true),
        ss: nearest_distances(synth, synth, true),
    })
}

/// Percentile by linear interpolation between closest ranks: position
/// `(alpha / 100) * (n - 1)` over the sorted values.
pub fn percentile(sorted_values: &[f64], alpha: f64) -> Result<f64> {
    if sorted_values.is_empty() {
        return Err(Error::EmptyInput("percentile of an empty list".into()));
    }
    if !(alpha > 0.0 && alpha <= 100.0) {
        return Err(Error::InvalidParameter(format!(
            "percentile alpha must lie in (0, 100], got {alpha}"
        )));
    }
    let pos = alpha / 100.0 * (sorted_values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]))
}

/// Degenerate cases of the DCR ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RdcrFlag {
    /// Both percentiles positive; ratio is d_rs / d_hs.
    Ok,
    /// Both percentiles zero (both splits memorized); ratio reported as 1.
    DegenerateBothZero,
    /// Holdout percentile zero with positive training percentile.
    InfiniteHsZero,
}

/// DCR ratio at one percentile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdcrResult {
    pub alpha: f64,
    pub d_rs: f64,
    pub d_hs: f64,
    pub ratio: f64,
    pub flag: RdcrFlag,
}

/// Ratio of the alpha-percentile train-to-synthetic DCR to the
/// alpha-percentile holdout-to-synthetic DCR.
pub fn rdcr(profile: &DcrProfile, alpha: f64) -> Result<RdcrResult> {
    let d_rs = percentile(&profile.rs, alpha)?;
    let d_hs = percentile(&profile.hs, alpha)?;
    let (ratio, flag) = if d_hs > 0.0 {
        (d_rs / d_hs, RdcrFlag::Ok)
    } else if d_rs == 0.0 {
        (1.0, RdcrFlag::DegenerateBothZero)
    } else {
        (f64::INFINITY, RdcrFlag::InfiniteHsZero)
    };
    Ok(RdcrResult {
        alpha,
        d_rs,
        d_hs,
        ratio,
        flag,
    })
}

/// One [`rdcr`] result per alpha, in input order.
pub fn rdcr_sweep(profile: &DcrProfile, alphas: &[f64]) -> Result<Vec<RdcrResult>> {
    if alphas.is_empty() {
        return Err(Error::EmptyInput("rdcr sweep needs at least one alpha".into()));
    }
    alphas.iter().map(|&a| rdcr(profile, a)).collect()
}

/// Default percentile grid for sweep plots.
pub const DEFAULT_SWEEP_ALPHAS: [f64; 7] = [0.5, 1.0, 2.0, 5.0, 10.0, 25.0, 50.0];

/// Write sweep results as CSV: `alpha,d_rs,d_hs,ratio`.
pub fn write_sweep_csv<W: Write>(results: &[RdcrResult], mut writer: W) -> Result<()> {
    let io_err = |source| Error::Io {
        path: "<sweep csv>".into(),
        source,
    };
    writeln!(writer, "alpha,d_rs,d_hs,ratio").map_err(io_err)?;
    for r in results {
        writeln!(writer, "{},{},{},{}", r.alpha, r.d_rs, r.d_hs, r.ratio).map_err(io_err)?;
    }
    Ok(())
}
