//! Evaluation-time calibration metrics and the Bayes decision rule.
//!
//! ECE and MCE bin predictions by confidence and compare per-bin accuracy to
//! per-bin mean confidence; Brier and NLL are proper scoring rules computed
//! directly from the probability rows. All metrics are reported as raw
//! proportions.

use crate::binning::{accumulate, confidences_and_hits, BinPartition, BinStats, ConfidenceRecord};
use crate::error::{Error, Result};
use crate::losses::PROB_FLOOR;
use crate::matrix::Matrix;

/// Accuracy plus the four calibration metrics and the reliability-diagram
/// bins for one evaluation set.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub accuracy: f64,
    pub ece: f64,
    pub mce: f64,
    pub brier: f64,
    pub nll: f64,
    pub bins: Vec<BinStats>,
    pub num_bins: usize,
}

impl MetricReport {
    /// Mean confidence over all samples, recovered from the bin stats.
    pub fn mean_confidence(&self) -> f64 {
        let mut total = 0usize;
        let mut sum = 0.0;
        for b in &self.bins {
            if let Some(c) = b.mean_confidence {
                sum += c * b.count as f64;
                total += b.count;
            }
        }
        sum / total as f64
    }
}

/// Expected calibration error over equal-width bins:
/// `Σⱼ (|Bⱼ|/n)·|acc(Bⱼ) − conf(Bⱼ)|`, empty bins skipped.
pub fn ece(records: &[ConfidenceRecord], num_bins: usize) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::InvalidInput("ECE needs at least one record".into()));
    }
    let partition = BinPartition::uniform(num_bins)?;
    let (bins, _) = accumulate(records, &partition);
    let n = records.len() as f64;
    Ok(bins
        .iter()
        .filter(|b| b.count > 0)
        .map(|b| (b.count as f64 / n) * (b.accuracy() - b.mean_confidence()).abs())
        .sum())
}

/// Maximum calibration error: the largest per-bin accuracy/confidence gap
/// over nonempty bins.
pub fn mce(records: &[ConfidenceRecord], num_bins: usize) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::InvalidInput("MCE needs at least one record".into()));
    }
    let partition = BinPartition::uniform(num_bins)?;
    let (bins, _) = accumulate(records, &partition);
    Ok(bins
        .iter()
        .filter(|b| b.count > 0)
        .map(|b| (b.accuracy() - b.mean_confidence()).abs())
        .fold(0.0, f64::max))
}

/// Multiclass Brier score: mean over samples of the squared Euclidean
/// distance between the probability row and the one-hot label.
pub fn brier(probs: &Matrix, labels: &[usize]) -> f64 {
    assert_eq!(probs.rows(), labels.len());
    let mut total = 0.0;
    for (i, &label) in labels.iter().enumerate() {
        for (k, &p) in probs.row(i).iter().enumerate() {
            let t = if k == label { 1.0 } else { 0.0 };
            total += (p - t) * (p - t);
        }
    }
    total / probs.rows() as f64
}

/// Mean negative log probability of the true class, with probabilities
/// clamped below at `1e-12` so the score stays finite.
pub fn nll(probs: &Matrix, labels: &[usize]) -> f64 {
    assert_eq!(probs.rows(), labels.len());
    let mut total = 0.0;
    for (i, &label) in labels.iter().enumerate() {
        total -= probs.at(i, label).max(PROB_FLOOR).ln();
    }
    total / probs.rows() as f64
}

/// Per-bin count, mean confidence, and accuracy for a reliability diagram.
/// All `num_bins` bins are reported; empty ones carry count 0 and no stats.
pub fn reliability_bins(records: &[ConfidenceRecord], num_bins: usize) -> Result<Vec<BinStats>> {
    let partition = BinPartition::uniform(num_bins)?;
    let (bins, _) = accumulate(records, &partition);
    Ok(bins
        .iter()
        .map(|b| BinStats {
            count: b.count,
            mean_confidence: (b.count > 0).then(|| b.mean_confidence()),
            accuracy: (b.count > 0).then(|| b.accuracy()),
        })
        .collect())
}

/// Action losses `λ[action][class]` for the Bayes decision rule.
#[derive(Debug, Clone, PartialEq)]
pub struct LossMatrix {
    entries: Matrix,
}

impl LossMatrix {
    /// `num_actions × num_classes` nonnegative losses.
    pub fn new(entries: Matrix) -> Result<Self> {
        if entries.rows() == 0 || entries.cols() == 0 {
            return Err(Error::InvalidConfig("loss matrix cannot be empty".into()));
        }
        if entries.data().iter().any(|&v| v < 0.0 || v.is_nan()) {
            return Err(Error::InvalidConfig("losses must be nonnegative".into()));
        }
        Ok(LossMatrix { entries })
    }

    /// Zero-one losses: 0 on the diagonal, 1 elsewhere. Under these the
    /// Bayes rule reduces to the posterior argmax.
    pub fn zero_one(num_classes: usize) -> Self {
        let mut m = Matrix::zeros(num_classes, num_classes);
        for i in 0..num_classes {
            for k in 0..num_classes {
                if i != k {
                    m.set(i, k, 1.0);
                }
            }
        }
        LossMatrix { entries: m }
    }

    pub fn num_actions(&self) -> usize {
        self.entries.rows()
    }

    pub fn num_classes(&self) -> usize {
        self.entries.cols()
    }
}

/// Picks the action minimizing expected loss `Σₖ λ[i][k]·p(k)`; ties break
/// toward the lowest action index.
pub fn bayes_decision(posterior: &[f64], losses: &LossMatrix) -> Result<usize> {
    if losses.num_classes() != posterior.len() {
        return Err(Error::InvalidConfig(format!(
            "loss matrix covers {} classes, posterior has {}",
            losses.num_classes(),
            posterior.len()
        )));
    }
    let mut best = 0;
    let mut best_risk = f64::INFINITY;
    for i in 0..losses.num_actions() {
        let risk: f64 = losses
            .entries
            .row(i)
            .iter()
            .zip(posterior)
            .map(|(&l, &p)| l * p)
            .sum();
        if risk < best_risk {
            best_risk = risk;
            best = i;
        }
    }
    Ok(best)
}

/// Full metric report for probability rows against integer labels.
pub fn evaluate(probs: &Matrix, labels: &[usize], num_bins: usize) -> Result<MetricReport> {
    if probs.rows() == 0 {
        return Err(Error::InvalidInput("cannot evaluate an empty set".into()));
    }
    let records = confidences_and_hits(probs, labels);
    let hits = records.iter().filter(|r| r.hit).count();
    Ok(MetricReport {
        accuracy: hits as f64 / records.len() as f64,
        ece: ece(&records, num_bins)?,
        mce: mce(&records, num_bins)?,
        brier: brier(probs, labels),
        nll: nll(probs, labels),
        bins: reliability_bins(&records, num_bins)?,
        num_bins,
    })
}
