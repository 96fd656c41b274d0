//! Evaluation toolkit for synthetic tabular trip data.
//!
//! The crate compares a synthetic trip table against the real table it was
//! generated from, along five axes:
//!
//! - downstream-task utility: gradient-boosted regression R-squared across
//!   the six train/predict combinations ([`downstream`]);
//! - distribution similarity: Wasserstein-1 distance between encoded row
//!   sets, exact or entropically regularized ([`ot`]);
//! - diversity: k-nearest-neighbor coverage ([`coverage`]);
//! - network structure: origin-destination graph similarity ([`graph`]);
//! - privacy: distance-to-closest-record profiles and the percentile DCR
//!   ratio that contrasts training against holdout proximity ([`privacy`]).
//!
//! [`baselines`] supplies reference generators (Gaussian copula, independent
//! marginals, noisy memorizer) so the whole pipeline can be exercised
//! without any external model, and [`harness`] orchestrates repeated
//! fit/sample runs into mean/std reports.

pub mod baselines;
pub mod coverage;
pub mod data;
pub mod distance;
pub mod downstream;
pub mod error;
pub mod graph;
pub mod harness;
pub mod ot;
pub mod privacy;

pub use error::{Error, Result};
