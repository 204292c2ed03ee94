//! Attention-guided stacked ensemble for crop-cover classification.
//!
//! This crate is the algorithmic core of the `asen` toolkit. It covers the
//! whole modelling path from per-pixel reflectance to evaluated predictions:
//!
//! - [`spectral`]: vegetation indices (NDVI, EVI, SAVI, ...) and feature
//!   vector assembly from band records;
//! - [`dataset`]: tabular datasets, z-score normalization, stratified
//!   splitting, bootstrap resampling, and a synthetic data generator;
//! - [`mlp`]: a from-scratch multilayer perceptron with backpropagation,
//!   dropout, Adam, and early stopping;
//! - [`ensemble`]: bootstrap pools of MLP base learners and the
//!   attention-weighted stacking combiner that softmax-weights their
//!   probability rows per sample;
//! - [`baselines`]: multinomial logistic regression and a linear SVM;
//! - [`metrics`]: confusion matrices, precision/recall/F1, one-vs-rest AUC,
//!   and bootstrap confidence intervals;
//! - [`importance`]: permutation feature importance and the
//!   feature-selection retraining experiment;
//! - [`pipeline`]: deterministic end-to-end orchestration of the above.
//!
//! Everything is a pure function of its inputs and an explicit `u64` seed.
//! Transcendental math goes through `libm` so results are bit-identical
//! across platforms. The crate is `no_std` (with `alloc`); file formats and
//! CLI live in the companion `asen-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod baselines;
pub mod dataset;
pub mod ensemble;
pub mod importance;
pub mod linalg;
pub mod metrics;
pub mod mlp;
pub mod pipeline;
pub mod rng;
pub mod spectral;

pub use dataset::{Dataset, DatasetSplit, LabeledSample, NormalizationParams, SyntheticSpec};
pub use ensemble::{AsenModel, BaseLearnerPool, PoolConfig};
pub use metrics::{ConfusionMatrix, MetricsReport};
pub use mlp::{MlpConfig, MlpModel, TrainConfig, TrainReport};
pub use pipeline::AsenEnsemble;
pub use spectral::{BandMapping, BandRecord, IndexVector};
