//! Leakage-aware evaluation of minority over-sampling on imbalanced data.
//!
//! The crate bundles everything needed to measure how much over-sampling
//! inflates cross-validated metrics when it is applied before the data is
//! partitioned, and how much it genuinely helps when applied to the training
//! partition only:
//!
//! - [`dataio`]: EHG-style records, the `csv_v1` interchange layout,
//!   preprocessing and a synthetic cohort generator.
//! - [`signal`]: zero-phase Butterworth band-pass, EMD and wavelet packets.
//! - [`features`]: the univariate feature library and [`features::FeatureMatrix`].
//! - [`oversample`]: SMOTE, ADASYN, Cluster-SMOTE, SMOTE-Tomek, random duplication.
//! - [`classify`]: KNN, QDA, linear SVM, CART, random forest, AdaBoost.
//! - [`evaluate`]: stratified folds, AUC, placement-aware pipelines, bootstrap
//!   ranking and nested sampler search.
//! - [`synthexp`]: the uniform-noise leakage experiment and the 2-D toy data.
//!
//! All randomness flows through [`rng`], so every result is a pure function of
//! its inputs and seed, independent of the rayon thread count.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod dataio;
mod error;
pub mod evaluate;
pub mod features;
pub mod io;
pub mod oversample;
pub mod rng;
pub mod signal;
pub mod synthexp;

pub use error::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate version embedded in every written artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
