//! Confidence binning shared by the ARC loss and the calibration metrics.
//!
//! A `BinPartition` divides the `[0, 1]` confidence range into equal-width
//! bins. Intervals are right-inclusive and the first bin is closed on the
//! left, so confidence `1.0` lands in the last bin and `0.0` in the first.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Equal-width partition of `[0, 1]` into `num_bins` bins.
#[derive(Debug, Clone, PartialEq)]
pub struct BinPartition {
    num_bins: usize,
    edges: Vec<f64>,
}

impl BinPartition {
    pub fn uniform(num_bins: usize) -> Result<Self> {
        if num_bins == 0 {
            return Err(Error::InvalidConfig("need at least one bin".into()));
        }
        let edges = (0..=num_bins).map(|i| i as f64 / num_bins as f64).collect();
        Ok(BinPartition { num_bins, edges })
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Bin containing `confidence`. Bin `i` covers `(edges[i], edges[i+1]]`,
    /// except bin 0 which also includes its left edge.
    pub fn bin_index(&self, confidence: f64) -> usize {
        for i in 0..self.num_bins {
            if confidence <= self.edges[i + 1] {
                return i;
            }
        }
        self.num_bins - 1
    }
}

/// The confidence of one prediction: the row maximum of the probability
/// vector, and whether the prediction matched the reference label.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceRecord {
    pub sample_index: usize,
    pub confidence: f64,
    pub hit: bool,
}

/// Per-bin aggregate: sample count, mean confidence, and accuracy.
///
/// `mean_confidence` and `accuracy` are `None` for empty bins.
#[derive(Debug, Clone, PartialEq)]
pub struct BinStats {
    pub count: usize,
    pub mean_confidence: Option<f64>,
    pub accuracy: Option<f64>,
}

/// Index of the row maximum; ties break toward the lowest index.
pub fn row_argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Extracts `(confidence, hit)` records from a probability matrix.
///
/// Confidence is the row maximum; a hit means the argmax equals the
/// reference label, with argmax ties broken toward the lowest class index.
pub fn confidences_and_hits(probs: &Matrix, reference_labels: &[usize]) -> Vec<ConfidenceRecord> {
    assert_eq!(
        probs.rows(),
        reference_labels.len(),
        "one reference label per probability row"
    );
    (0..probs.rows())
        .map(|i| {
            let row = probs.row(i);
            let argmax = row_argmax(row);
            ConfidenceRecord {
                sample_index: i,
                confidence: row[argmax],
                hit: argmax == reference_labels[i],
            }
        })
        .collect()
}

/// Running totals for one bin while scanning records.
#[derive(Debug, Clone, Default)]
pub(crate) struct BinAccum {
    pub count: usize,
    pub confidence_sum: f64,
    pub hits: usize,
}

impl BinAccum {
    pub fn mean_confidence(&self) -> f64 {
        self.confidence_sum / self.count as f64
    }

    pub fn accuracy(&self) -> f64 {
        self.hits as f64 / self.count as f64
    }
}

/// Accumulates records into the partition's bins. Returns one accumulator
/// per bin (empty bins have `count == 0`) plus each record's bin index.
pub(crate) fn accumulate(
    records: &[ConfidenceRecord],
    partition: &BinPartition,
) -> (Vec<BinAccum>, Vec<usize>) {
    let mut bins = vec![BinAccum::default(); partition.num_bins()];
    let mut assignment = Vec::with_capacity(records.len());
    for r in records {
        let b = partition.bin_index(r.confidence);
        bins[b].count += 1;
        bins[b].confidence_sum += r.confidence;
        bins[b].hits += r.hit as usize;
        assignment.push(b);
    }
    (bins, assignment)
}
