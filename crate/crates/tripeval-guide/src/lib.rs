//! mdbook cannot run a book's code blocks as tests, so each chapter is
//! included here as a module doc and `cargo test --doc` does the work. One
//! module per chapter keeps failures traceable to their markdown file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/data-model.md")]
pub mod data_model {}

#[doc = include_str!("../../../book/src/downstream.md")]
pub mod downstream {}

#[doc = include_str!("../../../book/src/wasserstein.md")]
pub mod wasserstein {}

#[doc = include_str!("../../../book/src/coverage.md")]
pub mod coverage {}

#[doc = include_str!("../../../book/src/graph-similarity.md")]
pub mod graph_similarity {}

#[doc = include_str!("../../../book/src/privacy.md")]
pub mod privacy {}

#[doc = include_str!("../../../book/src/baselines.md")]
pub mod baselines {}

#[doc = include_str!("../../../book/src/harness.md")]
pub mod harness {}
