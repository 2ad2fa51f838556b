//! `mixcal`: Mixup training, the ARC confidence-matching loss, and a
//! calibration metrics suite for small feed-forward classifiers.
//!
//! The crate trains MLP classifiers on synthetic Gaussian-mixture benchmarks
//! (or CSV data) with four method variants — plain cross-entropy, Mixup,
//! ARC, and ARC combined with Mixup — and evaluates accuracy, ECE, MCE,
//! Brier score, and NLL. Because the synthetic generators have closed-form
//! posteriors, calibration claims can be checked against a predictor that is
//! calibrated by construction. Every run is a pure function of its config
//! and seed: repeated runs and parallel grids are bit-identical.
//!
//! ## Start with the examples
//!
//! Each major capability has a runnable example:
//!
//! ```text
//! cargo run --release --example mixup_sampling        # Beta draws and mixed batches
//! cargo run --release --example gradient_check        # finite differences vs backprop
//! cargo run --release --example calibration_metrics   # ECE/MCE/Brier/NLL + reliability table
//! cargo run --release --example bayes_rule            # decisions under asymmetric losses
//! cargo run --release --example synthetic_data        # generators, posteriors, optimal error
//! cargo run --release --example train_baseline        # one cross-entropy run, full report
//! cargo run --release --example mixup_miscalibration  # baseline vs Mixup vs ARC+Mixup
//! cargo run --release --example arc_on_validation     # ARC fed by a validation split
//! cargo run --release --example prior_classifier      # what ARC alone collapses to
//! ```
//!
//! ## Or use the CLI
//!
//! The `mixcal` binary wraps the same library: `gen-data`, `train`, `grid`,
//! `eval`, and `report` subcommands. See the README for the config file
//! format.
//!
//! ## Layout
//!
//! - [`nn`]: the MLP, exact gradients, momentum SGD, gradient checking
//! - [`mixup`]: Beta-distributed interpolation of input pairs
//! - [`losses`]: cross-entropy, the ARC loss (V1/V2), the combined objective
//! - [`binning`]: confidence extraction and equal-width binning
//! - [`metrics`]: ECE, MCE, Brier, NLL, reliability bins, Bayes decisions
//! - [`data`]: Gaussian-mixture generators with closed-form posteriors, CSV
//!   ingestion, deterministic splits
//! - [`config`], [`train`], [`grid`], [`export`]: the experiment harness

pub mod binning;
pub mod config;
pub mod data;
pub mod error;
pub mod export;
pub mod grid;
pub mod losses;
pub mod matrix;
pub mod metrics;
pub mod mixup;
pub mod nn;
pub mod rng;
pub mod train;

pub use binning::{confidences_and_hits, BinPartition, BinStats, ConfidenceRecord};
pub use config::{ExperimentConfig, GridConfig, LrSchedule, Method};
pub use data::{
    bayes_error_estimate, load_csv, sample_dataset, split, true_posterior, GaussianMixtureSpec,
    LabeledDataset, SplitSpec,
};
pub use error::{Error, Result};
pub use export::{export_reliability, export_results};
pub use grid::{run_grid, GridRunRecord};
pub use losses::{
    arc_loss, arc_loss_averaged, arc_reference_labels, combined_loss, cross_entropy, ArcConfig,
    ArcTarget, ArcVariant, BinMode,
};
pub use matrix::Matrix;
pub use metrics::{
    bayes_decision, brier, ece, evaluate, mce, nll, reliability_bins, LossMatrix, MetricReport,
};
pub use mixup::{mix_batch, sample_gamma, MixupBatch};
pub use nn::{
    backward, forward, grad_check, init_network, sgd_step, softmax, ParamSet, SgdState,
};
pub use train::{prepare_data, train, train_arc_on_validation, DataSplits, RunResult};
