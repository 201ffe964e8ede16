//! Tabular fault-data synthesis toolkit.
//!
//! The crate provides the full pipeline for generating surrogate microgrid
//! fault-snapshot datasets, training conditional generative models over them
//! (a feature-feedback GAN plus CGAN and WGAN-GP baselines), and evaluating
//! the synthetic output with statistical-fidelity metrics and a
//! train-on-synthetic/test-on-real (TSTR) classifier harness.
//!
//! Modules:
//!
//! - [`numerics`]: dense matrices, MLP forward/backward, Adam, gradient
//!   clipping, and a fixed, documented PRNG. Everything downstream is built
//!   on this substrate and is deterministic given a seed.
//! - [`data`]: dataset schema, CSV ingestion, label encoding, `[-1, 1]`
//!   scaling with exact inverse, mini-batching, class-imbalance statistics.
//! - [`gan`]: conditional generator/discriminator models, the feedback loss
//!   functions, the training loop, balanced synthesis, and model
//!   serialization.
//! - [`fidelity`]: per-feature Wasserstein-1 / KS, dataset-level Gaussian
//!   MMD, the aggregate statistical-inconsistency scalar, and histogram
//!   export for density comparisons.
//! - [`tstr`]: four small classifiers (decision tree, k-NN, MLP, linear
//!   SVM) and the TSTR evaluation harness.
//! - [`scenario`]: the parametric fault-snapshot fixture generator
//!   (external line faults and internal inverter switch faults).

pub mod data;
pub mod fidelity;
pub mod gan;
pub mod numerics;
pub mod scenario;
pub mod tstr;

pub use data::{ClassStats, Dataset, FeatureSchema, ScalerParams};
pub use gan::{GanConfig, GanVariant, TrainedGan};
pub use numerics::{Matrix, MlpParams, MlpSpec, SeededRng};
