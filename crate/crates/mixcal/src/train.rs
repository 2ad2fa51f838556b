//! The training harness: one run of any method on prepared data splits.
//!
//! Per batch the loop optionally mixes (drawing from the Mixup stream),
//! computes cross-entropy on the mixed or raw batch, computes ARC per the
//! configured target, combines the gradients as `CE + arc_weight·ARC`, and
//! takes one momentum-SGD step. Metrics are evaluated on the raw — never
//! mixed — validation and test splits after every epoch. Every run is a
//! pure function of `(config, seed)`.

use std::time::Instant;

use rand::seq::SliceRandom;

use crate::config::{ExperimentConfig, Method};
use crate::data::{self, GaussianMixtureSpec, LabeledDataset, SplitSpec};
use crate::error::{Error, Result};
use crate::losses::{arc_on_probs, arc_reference_labels, cross_entropy, ArcEvalPlan};
use crate::matrix::Matrix;
use crate::metrics::{self, MetricReport};
use crate::mixup::mix_batch;
use crate::nn::{backward, forward, init_network, sgd_step, softmax, ParamSet, SgdState};
use crate::rng::{self, Purpose, Rng};

/// Train/validation/test data for one run.
#[derive(Debug, Clone)]
pub struct DataSplits {
    pub train: LabeledDataset,
    pub validation: LabeledDataset,
    pub test: LabeledDataset,
}

/// Per-epoch training traces. `arc` is present only for ARC methods.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingCurves {
    pub ce: Vec<f64>,
    pub arc: Option<Vec<f64>>,
    pub val_accuracy: Vec<f64>,
}

/// Everything produced by one training run.
#[derive(Debug, Clone)]
pub struct RunResult {
    /// Config echo with the resolved seed.
    pub config: ExperimentConfig,
    pub test: MetricReport,
    pub validation: MetricReport,
    pub curves: TrainingCurves,
    pub wall_time_s: f64,
}

/// One-hot rows for integer labels.
pub fn one_hot(labels: &[usize], num_classes: usize) -> Matrix {
    let mut m = Matrix::zeros(labels.len(), num_classes);
    for (i, &t) in labels.iter().enumerate() {
        m.set(i, t, 1.0);
    }
    m
}

/// Materializes the config's dataset (generator or CSV) and splits it.
pub fn prepare_data(config: &ExperimentConfig) -> Result<DataSplits> {
    let seed = config.seed_or_err()?;
    let dataset = match GaussianMixtureSpec::by_name(&config.dataset) {
        Some(spec) => {
            if config.dataset_size == 0 {
                return Err(Error::InvalidConfig("dataset_size must be at least 1".into()));
            }
            data::sample_dataset(&spec, config.dataset_size, &mut rng::stream(seed, Purpose::DataGen))?
        }
        None => data::load_csv(&config.dataset)?,
    };
    let split_spec = SplitSpec::new(config.split[0], config.split[1], config.split[2], seed);
    let (train, validation, test) = data::split(&dataset, &split_spec)?;
    Ok(DataSplits {
        train,
        validation,
        test,
    })
}

/// Metric report of the current parameters on a raw dataset.
pub fn evaluate_model(
    params: &ParamSet,
    dataset: &LabeledDataset,
    num_bins: usize,
) -> Result<MetricReport> {
    let (logits, _) = forward(params, &dataset.inputs)?;
    metrics::evaluate(&softmax(&logits), &dataset.labels, num_bins)
}

fn check_data(config: &ExperimentConfig, data: &DataSplits) -> Result<()> {
    for (name, part) in [
        ("train", &data.train),
        ("validation", &data.validation),
        ("test", &data.test),
    ] {
        if part.is_empty() {
            return Err(Error::InvalidInput(format!("{name} split is empty")));
        }
    }
    if data.train.dim() != config.layer_sizes[0] {
        return Err(Error::InvalidConfig(format!(
            "data has {} features but layer_sizes starts at {}",
            data.train.dim(),
            config.layer_sizes[0]
        )));
    }
    let classes = *config.layer_sizes.last().unwrap();
    if data.train.num_classes != classes {
        return Err(Error::InvalidConfig(format!(
            "data has {} classes but layer_sizes ends at {classes}",
            data.train.num_classes
        )));
    }
    Ok(())
}

fn at_epoch(err: Error, epoch: usize) -> Error {
    match err {
        Error::TrainingDiverged { .. } => Error::TrainingDiverged { epoch },
        other => other,
    }
}

struct StepOutcome {
    grads: ParamSet,
    ce: f64,
    arc: Option<f64>,
}

/// One optimization step for the in-batch methods (everything except
/// `ArcOnValidation`).
fn training_step(
    params: &ParamSet,
    config: &ExperimentConfig,
    x: &Matrix,
    y: &[usize],
    num_classes: usize,
    mixup_rng: &mut Rng,
) -> Result<StepOutcome> {
    let method = config.method;
    let arc_weight = config.arc.arc_weight;
    let drop_ce = config.arc_only_debug && method.uses_arc();

    let mix = if method.mixes() {
        Some(mix_batch(x, y, num_classes, config.beta_mix, mixup_rng)?)
    } else {
        None
    };
    let (logits, cache) = match &mix {
        Some(mb) => forward(params, &mb.x_tilde)?,
        None => forward(params, x)?,
    };
    let probs = softmax(&logits);
    let (ce, dlogits_ce) = match &mix {
        Some(mb) => cross_entropy(&probs, &mb.t_tilde)?,
        None => cross_entropy(&probs, &one_hot(y, num_classes))?,
    };

    if !method.uses_arc() {
        return Ok(StepOutcome {
            grads: backward(params, &cache, &dlogits_ce)?,
            ce,
            arc: None,
        });
    }

    let mode = config.arc.bin_mode;
    let variant = config.arc.variant;
    let base_dlogits = if drop_ce {
        Matrix::zeros(dlogits_ce.rows(), dlogits_ce.cols())
    } else {
        dlogits_ce
    };

    match &mix {
        None => {
            // ARC on the raw batch against the true labels; shares the
            // cross-entropy forward pass.
            let (arc, dlog_arc) = arc_on_probs(&probs, y, mode, variant)?;
            let mut dlogits = base_dlogits;
            if arc_weight > 0.0 {
                dlogits.add_scaled(&dlog_arc, arc_weight);
            }
            Ok(StepOutcome {
                grads: backward(params, &cache, &dlogits)?,
                ce,
                arc: Some(arc),
            })
        }
        Some(mb) => match arc_reference_labels(mb, config.arc.target) {
            ArcEvalPlan::Mixed { reference_labels } => {
                let (arc, dlog_arc) = arc_on_probs(&probs, &reference_labels, mode, variant)?;
                let mut dlogits = base_dlogits;
                if arc_weight > 0.0 {
                    dlogits.add_scaled(&dlog_arc, arc_weight);
                }
                Ok(StepOutcome {
                    grads: backward(params, &cache, &dlogits)?,
                    ce,
                    arc: Some(arc),
                })
            }
            ArcEvalPlan::Originals { first, second } => {
                let mut grads = backward(params, &cache, &base_dlogits)?;
                let mut arc_total = 0.0;
                for (inputs, labels) in [(&mb.x1, &first), (&mb.x2, &second)] {
                    let (lg, ch) = forward(params, inputs)?;
                    let pr = softmax(&lg);
                    let (arc, dlog_arc) = arc_on_probs(&pr, labels, mode, variant)?;
                    arc_total += 0.5 * arc;
                    if arc_weight > 0.0 {
                        let extra = backward(params, &ch, &dlog_arc)?;
                        grads.add_scaled(&extra, 0.5 * arc_weight);
                    }
                }
                Ok(StepOutcome {
                    grads,
                    ce,
                    arc: Some(arc_total),
                })
            }
        },
    }
}

/// Indices of the next validation batch, cycling through the split.
fn next_val_chunk(cursor: &mut usize, n_val: usize, batch_size: usize) -> Vec<usize> {
    let take = batch_size.min(n_val);
    let out = (0..take).map(|k| (*cursor + k) % n_val).collect();
    *cursor = (*cursor + take) % n_val;
    out
}

fn run_loop(config: &ExperimentConfig, data: &DataSplits, arc_from_validation: bool) -> Result<RunResult> {
    let seed = config.seed_or_err()?;
    config.validate()?;
    check_data(config, data)?;
    let num_classes = *config.layer_sizes.last().unwrap();
    let track_arc = config.method.uses_arc();

    let mut params = init_network(&config.layer_sizes, seed)?;
    let mut state = SgdState::new(
        &params,
        config.learning_rate.initial,
        config.momentum,
        config.weight_decay,
    )?;
    let mut shuffle_rng = rng::stream(seed, Purpose::Shuffle);
    let mut mixup_rng = rng::stream(seed, Purpose::Mixup);
    let mut val_cursor = 0usize;

    let mut ce_curve = Vec::with_capacity(config.epochs);
    let mut arc_curve = Vec::with_capacity(config.epochs);
    let mut val_acc_curve = Vec::with_capacity(config.epochs);
    let mut validation = None;
    let mut test = None;

    let started = Instant::now();
    let n = data.train.len();
    for epoch in 0..config.epochs {
        state.learning_rate = config.learning_rate.rate_at(epoch);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut shuffle_rng);

        let mut ce_sum = 0.0;
        let mut arc_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let x = data.train.inputs.gather_rows(chunk);
            let y: Vec<usize> = chunk.iter().map(|&i| data.train.labels[i]).collect();

            let outcome = if arc_from_validation {
                validation_arc_step(&params, config, &x, &y, num_classes, data, &mut val_cursor)
            } else {
                training_step(&params, config, &x, &y, num_classes, &mut mixup_rng)
            }
            .map_err(|e| at_epoch(e, epoch))?;

            if !outcome.ce.is_finite() || outcome.arc.is_some_and(|a| !a.is_finite()) {
                return Err(Error::TrainingDiverged { epoch });
            }
            sgd_step(&mut params, &outcome.grads, &mut state).map_err(|e| at_epoch(e, epoch))?;
            ce_sum += outcome.ce;
            arc_sum += outcome.arc.unwrap_or(0.0);
            batches += 1;
        }

        ce_curve.push(ce_sum / batches as f64);
        if track_arc {
            arc_curve.push(arc_sum / batches as f64);
        }

        let val_report = evaluate_model(&params, &data.validation, config.num_eval_bins)?;
        let test_report = evaluate_model(&params, &data.test, config.num_eval_bins)?;
        if !params.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        val_acc_curve.push(val_report.accuracy);
        validation = Some(val_report);
        test = Some(test_report);
    }

    Ok(RunResult {
        config: config.clone(),
        test: test.expect("at least one epoch"),
        validation: validation.expect("at least one epoch"),
        curves: TrainingCurves {
            ce: ce_curve,
            arc: track_arc.then_some(arc_curve),
            val_accuracy: val_acc_curve,
        },
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// One step of validation-set ARC: cross-entropy gradient from the training
/// batch plus `arc_weight` times the ARC gradient from the next validation
/// batch.
fn validation_arc_step(
    params: &ParamSet,
    config: &ExperimentConfig,
    x: &Matrix,
    y: &[usize],
    num_classes: usize,
    data: &DataSplits,
    val_cursor: &mut usize,
) -> Result<StepOutcome> {
    let drop_ce = config.arc_only_debug;
    let (logits, cache) = forward(params, x)?;
    let probs = softmax(&logits);
    let (ce, dlogits_ce) = cross_entropy(&probs, &one_hot(y, num_classes))?;
    let base = if drop_ce {
        Matrix::zeros(dlogits_ce.rows(), dlogits_ce.cols())
    } else {
        dlogits_ce
    };
    let mut grads = backward(params, &cache, &base)?;

    let chunk = next_val_chunk(val_cursor, data.validation.len(), config.batch_size);
    let vx = data.validation.inputs.gather_rows(&chunk);
    let vy: Vec<usize> = chunk.iter().map(|&i| data.validation.labels[i]).collect();
    let (vlogits, vcache) = forward(params, &vx)?;
    let vprobs = softmax(&vlogits);
    let (arc, dlog_arc) = arc_on_probs(&vprobs, &vy, config.arc.bin_mode, config.arc.variant)?;
    if config.arc.arc_weight > 0.0 {
        let extra = backward(params, &vcache, &dlog_arc)?;
        grads.add_scaled(&extra, config.arc.arc_weight);
    }
    Ok(StepOutcome {
        grads,
        ce,
        arc: Some(arc),
    })
}

/// Trains one run. `ArcOnValidation` configs are routed to
/// [`train_arc_on_validation`].
pub fn train(config: &ExperimentConfig, data: &DataSplits) -> Result<RunResult> {
    if config.method == Method::ArcOnValidation {
        return train_arc_on_validation(config, data);
    }
    run_loop(config, data, false)
}

/// Validation-set ARC training: the training split feeds cross-entropy, the
/// validation split feeds ARC, cycled one batch per optimization step.
pub fn train_arc_on_validation(config: &ExperimentConfig, data: &DataSplits) -> Result<RunResult> {
    if config.method != Method::ArcOnValidation {
        return Err(Error::InvalidConfig(
            "train_arc_on_validation requires method = \"arc_on_validation\"".into(),
        ));
    }
    run_loop(config, data, true)
}

/// Prepares data and trains: the whole pipeline for one config.
pub fn run(config: &ExperimentConfig) -> Result<RunResult> {
    let data = prepare_data(config)?;
    train(config, &data)
}
