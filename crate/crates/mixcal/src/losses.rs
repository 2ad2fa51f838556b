//! Training losses: cross-entropy on soft targets, the ARC
//! confidence-matching loss, and the weighted combination of both.
//!
//! ARC penalizes the squared gap between binned confidences and the accuracy
//! of the same bin, with the accuracy treated as a constant under
//! differentiation so the learning signal only moves the confidences. Two
//! variants: `V1` matches each bin's *mean* confidence to the bin accuracy,
//! `V2` matches every individual confidence. Empty bins are skipped and the
//! average runs over the number of nonempty bins.

use serde::{Deserialize, Serialize};

use crate::binning::{accumulate, confidences_and_hits, row_argmax, BinPartition, ConfidenceRecord};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::mixup::MixupBatch;

/// Floor applied to probabilities before taking logarithms.
pub const PROB_FLOOR: f64 = 1e-12;

/// Mean cross-entropy of `probs` against soft target rows, together with the
/// exact loss gradient with respect to the logits that produced `probs`.
///
/// `loss = −(1/n)·Σₙ Σₖ t[n,k]·ln(max(p[n,k], 1e-12))`, and the logit
/// gradient of softmax followed by this loss is `(probs − targets)/n`.
pub fn cross_entropy(probs: &Matrix, soft_targets: &Matrix) -> Result<(f64, Matrix)> {
    if probs.rows() != soft_targets.rows() || probs.cols() != soft_targets.cols() {
        return Err(Error::ShapeMismatch(format!(
            "probs {}x{} vs targets {}x{}",
            probs.rows(),
            probs.cols(),
            soft_targets.rows(),
            soft_targets.cols()
        )));
    }
    let n = probs.rows();
    if n == 0 {
        return Err(Error::InvalidInput("empty batch".into()));
    }
    for i in 0..n {
        let sum: f64 = soft_targets.row(i).iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidTarget(format!(
                "target row {i} sums to {sum}, expected 1"
            )));
        }
    }

    let inv_n = 1.0 / n as f64;
    let mut loss = 0.0;
    let mut dlogits = Matrix::zeros(n, probs.cols());
    for i in 0..n {
        let p = probs.row(i);
        let t = soft_targets.row(i);
        let out = dlogits.row_mut(i);
        for k in 0..p.len() {
            loss -= t[k] * p[k].max(PROB_FLOOR).ln();
            out[k] = (p[k] - t[k]) * inv_n;
        }
    }
    Ok((loss * inv_n, dlogits))
}

/// The two ARC formulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcVariant {
    /// Per bin: squared gap between the bin's mean confidence and its
    /// accuracy.
    V1,
    /// Per bin: mean squared gap between each confidence and the bin's
    /// accuracy. Also penalizes confidence spread within a bin.
    V2,
}

/// ARC loss over confidence records.
///
/// Returns the loss and its gradient with respect to each record's
/// confidence, in record order. Bin accuracies are constants under
/// differentiation, and bin membership is treated as fixed for the step.
pub fn arc_loss(
    records: &[ConfidenceRecord],
    partition: &BinPartition,
    variant: ArcVariant,
) -> Result<(f64, Vec<f64>)> {
    if records.is_empty() {
        return Err(Error::InvalidInput("ARC loss needs at least one record".into()));
    }
    let (bins, assignment) = accumulate(records, partition);
    let nonempty = bins.iter().filter(|b| b.count > 0).count() as f64;

    let mut loss = 0.0;
    for b in bins.iter().filter(|b| b.count > 0) {
        match variant {
            ArcVariant::V1 => {
                let gap = b.mean_confidence() - b.accuracy();
                loss += gap * gap;
            }
            ArcVariant::V2 => {
                // accumulated below per record to keep one pass
            }
        }
    }
    if variant == ArcVariant::V2 {
        for (r, &bi) in records.iter().zip(&assignment) {
            let gap = r.confidence - bins[bi].accuracy();
            loss += gap * gap / bins[bi].count as f64;
        }
    }
    loss /= nonempty;

    let grad = records
        .iter()
        .zip(&assignment)
        .map(|(r, &bi)| {
            let b = &bins[bi];
            let scale = 1.0 / (nonempty * b.count as f64);
            match variant {
                ArcVariant::V1 => 2.0 * (b.mean_confidence() - b.accuracy()) * scale,
                ArcVariant::V2 => 2.0 * (r.confidence - b.accuracy()) * scale,
            }
        })
        .collect();
    Ok((loss, grad))
}

/// ARC averaged over several bin counts: the arithmetic mean of `arc_loss`
/// at each count, with the gradient averaged the same way.
pub fn arc_loss_averaged(
    records: &[ConfidenceRecord],
    bin_counts: &[usize],
    variant: ArcVariant,
) -> Result<(f64, Vec<f64>)> {
    if bin_counts.is_empty() {
        return Err(Error::InvalidConfig("need at least one bin count".into()));
    }
    let mut loss = 0.0;
    let mut grad = vec![0.0; records.len()];
    for &m in bin_counts {
        let partition = BinPartition::uniform(m)?;
        let (l, g) = arc_loss(records, &partition, variant)?;
        loss += l;
        for (acc, v) in grad.iter_mut().zip(g) {
            *acc += v;
        }
    }
    let inv = 1.0 / bin_counts.len() as f64;
    for v in &mut grad {
        *v *= inv;
    }
    Ok((loss * inv, grad))
}

/// Binning scheme used when evaluating ARC during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinMode {
    /// One bin over the whole batch.
    Single,
    /// Fifteen equal-width bins.
    Fixed15,
    /// Average of the losses at 5, 15, and 30 bins.
    Averaged,
}

impl BinMode {
    pub fn bin_counts(self) -> &'static [usize] {
        match self {
            BinMode::Single => &[1],
            BinMode::Fixed15 => &[15],
            BinMode::Averaged => &[5, 15, 30],
        }
    }
}

/// Which inputs ARC sees when training with Mixup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcTarget {
    /// Evaluate ARC on the unmixed pair members against their own labels,
    /// averaging the two evaluations.
    Originals,
    /// Evaluate ARC on the mixed inputs against the dominant label of each
    /// pair.
    Mixed,
}

/// ARC hyperparameters carried by an experiment config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcConfig {
    pub variant: ArcVariant,
    pub bin_mode: BinMode,
    pub target: ArcTarget,
    pub arc_weight: f64,
}

impl Default for ArcConfig {
    fn default() -> Self {
        ArcConfig {
            variant: ArcVariant::V1,
            bin_mode: BinMode::Single,
            target: ArcTarget::Originals,
            arc_weight: 1.0,
        }
    }
}

/// `arc_loss` routed through a `BinMode`.
pub fn arc_loss_for_mode(
    records: &[ConfidenceRecord],
    mode: BinMode,
    variant: ArcVariant,
) -> Result<(f64, Vec<f64>)> {
    match mode {
        BinMode::Single => arc_loss(records, &BinPartition::uniform(1)?, variant),
        BinMode::Fixed15 => arc_loss(records, &BinPartition::uniform(15)?, variant),
        BinMode::Averaged => arc_loss_averaged(records, BinMode::Averaged.bin_counts(), variant),
    }
}

/// The combined objective: `ce + arc_weight·arc`.
pub fn combined_loss(ce: f64, arc: f64, arc_weight: f64) -> Result<f64> {
    if arc_weight < 0.0 {
        return Err(Error::InvalidConfig("arc_weight must be nonnegative".into()));
    }
    Ok(ce + arc_weight * arc)
}

/// How ARC should be evaluated for a Mixup batch.
#[derive(Debug, Clone, PartialEq)]
pub enum ArcEvalPlan {
    /// Run the network on `x1` against `first`, on `x2` against `second`,
    /// and average the two ARC values (gradients scale by 1/2 each).
    Originals { first: Vec<usize>, second: Vec<usize> },
    /// Run the network on the mixed inputs against the dominant label of
    /// each pair: `t1` when `γ ≥ 0.5`, else `t2`.
    Mixed { reference_labels: Vec<usize> },
}

/// Builds the ARC evaluation plan for a Mixup batch under the given target
/// mode.
pub fn arc_reference_labels(batch: &MixupBatch, target: ArcTarget) -> ArcEvalPlan {
    match target {
        ArcTarget::Originals => ArcEvalPlan::Originals {
            first: batch.t1.clone(),
            second: batch.t2.clone(),
        },
        ArcTarget::Mixed => ArcEvalPlan::Mixed {
            reference_labels: batch
                .gamma
                .iter()
                .zip(batch.t1.iter().zip(&batch.t2))
                .map(|(&g, (&a, &b))| if g >= 0.5 { a } else { b })
                .collect(),
        },
    }
}

/// Transports a gradient with respect to per-sample confidences back to the
/// logits.
///
/// The confidence is the row maximum of the softmax output; its subgradient
/// selects the argmax coordinate (ties to the lowest index), and the softmax
/// Jacobian of that coordinate carries the signal to every logit:
/// `dL/dz_m = g · p_k*·(δ_{k*m} − p_m)`.
pub fn confidence_grad_to_logits(probs: &Matrix, dconfidence: &[f64]) -> Matrix {
    assert_eq!(probs.rows(), dconfidence.len());
    let mut dlogits = Matrix::zeros(probs.rows(), probs.cols());
    for (i, &g) in dconfidence.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        let p = probs.row(i);
        let k = row_argmax(p);
        let pk = p[k];
        let out = dlogits.row_mut(i);
        for m in 0..p.len() {
            out[m] = if m == k {
                g * pk * (1.0 - p[m])
            } else {
                -g * pk * p[m]
            };
        }
    }
    dlogits
}

/// Convenience: records plus ARC for probability rows against reference
/// labels, returning the loss and the logit gradient.
pub fn arc_on_probs(
    probs: &Matrix,
    reference_labels: &[usize],
    mode: BinMode,
    variant: ArcVariant,
) -> Result<(f64, Matrix)> {
    let records = confidences_and_hits(probs, reference_labels);
    let (loss, dconf) = arc_loss_for_mode(&records, mode, variant)?;
    Ok((loss, confidence_grad_to_logits(probs, &dconf)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn records(entries: &[(f64, bool)]) -> Vec<ConfidenceRecord> {
        entries
            .iter()
            .enumerate()
            .map(|(i, &(confidence, hit))| ConfidenceRecord {
                sample_index: i,
                confidence,
                hit,
            })
            .collect()
    }

    #[test]
    fn cross_entropy_perfect_prediction_is_zero() {
        let probs = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let (loss, _) = cross_entropy(&probs, &probs).unwrap();
        assert!(loss.abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_hand_values() {
        let half = Matrix::from_rows(&[vec![0.5, 0.5]]).unwrap();
        let (loss, _) = cross_entropy(&half, &half).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);

        let mixed = Matrix::from_rows(&[vec![0.7, 0.3]]).unwrap();
        let (loss, _) = cross_entropy(&mixed, &mixed).unwrap();
        let expect = -(0.7 * 0.7_f64.ln() + 0.3 * 0.3_f64.ln());
        assert!((loss - expect).abs() < 1e-12);
        assert!((loss - 0.6109).abs() < 1e-4);
    }

    #[test]
    fn cross_entropy_gradient_is_probs_minus_targets_over_n() {
        let probs = Matrix::from_rows(&[vec![0.6, 0.4], vec![0.2, 0.8]]).unwrap();
        let targets = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let (_, d) = cross_entropy(&probs, &targets).unwrap();
        assert!((d.at(0, 0) - (0.6 - 1.0) / 2.0).abs() < 1e-15);
        assert!((d.at(1, 1) - (0.8 - 1.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn cross_entropy_rejects_bad_target_rows() {
        let probs = Matrix::from_rows(&[vec![0.5, 0.5]]).unwrap();
        let bad = Matrix::from_rows(&[vec![0.5, 0.6]]).unwrap();
        assert!(matches!(
            cross_entropy(&probs, &bad),
            Err(Error::InvalidTarget(_))
        ));
    }

    #[test]
    fn arc_constant_records_single_bin() {
        // all confidences 1.0, accuracy 0.5: both variants give 0.25
        let recs = records(&[(1.0, true), (1.0, false)]);
        let p = BinPartition::uniform(1).unwrap();
        let (v1, _) = arc_loss(&recs, &p, ArcVariant::V1).unwrap();
        let (v2, _) = arc_loss(&recs, &p, ArcVariant::V2).unwrap();
        assert!((v1 - 0.25).abs() < 1e-12);
        assert!((v2 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn arc_spread_fixture_separates_variants() {
        // mean confidence equals the accuracy, so V1 vanishes while V2
        // still charges for the spread
        let recs = records(&[
            (0.6, true),
            (0.7, true),
            (0.8, true),
            (0.9, true),
            (1.0, false),
        ]);
        let p = BinPartition::uniform(1).unwrap();
        let (v1, _) = arc_loss(&recs, &p, ArcVariant::V1).unwrap();
        let (v2, _) = arc_loss(&recs, &p, ArcVariant::V2).unwrap();
        assert!(v1.abs() < 1e-12);
        assert!((v2 - 0.02).abs() < 1e-12);
    }

    #[test]
    fn arc_zero_at_calibrated_fixed_point() {
        // every confidence equals its bin's accuracy
        let recs = records(&[(0.75, true), (0.75, true), (0.75, true), (0.75, false)]);
        let p = BinPartition::uniform(1).unwrap();
        for variant in [ArcVariant::V1, ArcVariant::V2] {
            let (loss, grad) = arc_loss(&recs, &p, variant).unwrap();
            assert!(loss.abs() < 1e-12);
            assert!(grad.iter().all(|g| g.abs() < 1e-12));
        }
    }

    #[test]
    fn arc_rejects_empty_records() {
        let p = BinPartition::uniform(1).unwrap();
        assert!(matches!(
            arc_loss(&[], &p, ArcVariant::V1),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn arc_gradient_matches_finite_differences_on_confidences() {
        // hits and bins stay fixed under the perturbation, which is exactly
        // the stop-gradient contract
        let base = records(&[
            (0.62, true),
            (0.71, false),
            (0.83, true),
            (0.97, true),
            (0.55, false),
            (0.44, true),
        ]);
        let eps = 1e-7;
        for m in [1usize, 2, 5, 15] {
            let p = BinPartition::uniform(m).unwrap();
            for variant in [ArcVariant::V1, ArcVariant::V2] {
                let (_, grad) = arc_loss(&base, &p, variant).unwrap();
                for j in 0..base.len() {
                    let mut plus = base.clone();
                    plus[j].confidence += eps;
                    let mut minus = base.clone();
                    minus[j].confidence -= eps;
                    let (lp, _) = arc_loss(&plus, &p, variant).unwrap();
                    let (lm, _) = arc_loss(&minus, &p, variant).unwrap();
                    let numeric = (lp - lm) / (2.0 * eps);
                    assert!(
                        (grad[j] - numeric).abs() < 1e-6,
                        "m={m} variant={variant:?} record {j}: {} vs {numeric}",
                        grad[j]
                    );
                }
            }
        }
    }

    #[test]
    fn arc_stop_gradient_uses_perturbed_accuracy_as_constant() {
        let base = records(&[(0.9, true), (0.8, true), (0.7, false), (0.6, true)]);
        let p = BinPartition::uniform(1).unwrap();
        let (loss_before, _) = arc_loss(&base, &p, ArcVariant::V1).unwrap();

        let mut flipped = base.clone();
        flipped[2].hit = true;
        let (loss_after, grad_after) = arc_loss(&flipped, &p, ArcVariant::V1).unwrap();
        assert!((loss_before - loss_after).abs() > 1e-6, "flipping a hit must move the loss");

        // gradient formula under the new (frozen) accuracy: finite
        // differences with hits held fixed
        let eps = 1e-7;
        for j in 0..flipped.len() {
            let mut plus = flipped.clone();
            plus[j].confidence += eps;
            let mut minus = flipped.clone();
            minus[j].confidence -= eps;
            let numeric = (arc_loss(&plus, &p, ArcVariant::V1).unwrap().0
                - arc_loss(&minus, &p, ArcVariant::V1).unwrap().0)
                / (2.0 * eps);
            assert!((grad_after[j] - numeric).abs() < 1e-6);
        }
    }

    #[test]
    fn arc_averaged_composes_from_single_counts() {
        let recs = records(&[
            (0.12, false),
            (0.35, false),
            (0.48, true),
            (0.52, false),
            (0.58, true),
            (0.63, true),
            (0.67, false),
            (0.72, true),
            (0.76, true),
            (0.81, true),
            (0.84, false),
            (0.88, true),
            (0.91, true),
            (0.93, true),
            (0.95, false),
            (0.96, true),
            (0.97, true),
            (0.98, true),
            (0.99, true),
            (1.0, true),
        ]);
        let (avg, avg_grad) = arc_loss_averaged(&recs, &[5, 15, 30], ArcVariant::V2).unwrap();
        let mut expect = 0.0;
        let mut expect_grad = vec![0.0; recs.len()];
        for m in [5usize, 15, 30] {
            let (l, g) = arc_loss(&recs, &BinPartition::uniform(m).unwrap(), ArcVariant::V2).unwrap();
            expect += l / 3.0;
            for (e, v) in expect_grad.iter_mut().zip(g) {
                *e += v / 3.0;
            }
        }
        assert!((avg - expect).abs() < 1e-15);
        for (a, e) in avg_grad.iter().zip(expect_grad) {
            assert!((a - e).abs() < 1e-15);
        }
    }

    #[test]
    fn arc_averaged_single_record_equals_single_bin() {
        let recs = records(&[(0.4, false)]);
        let (avg, _) = arc_loss_averaged(&recs, &[5, 15, 30], ArcVariant::V1).unwrap();
        let (single, _) =
            arc_loss(&recs, &BinPartition::uniform(1).unwrap(), ArcVariant::V1).unwrap();
        assert!((avg - single).abs() < 1e-15);
    }

    #[test]
    fn arc_averaged_zero_when_confidence_tracks_accuracy() {
        // every confidence equals the global accuracy and sits alone in its
        // bin's accuracy at every M as well: use all-equal records
        let recs = records(&[(0.5, true), (0.5, false), (0.5, true), (0.5, false)]);
        let (avg, _) = arc_loss_averaged(&recs, &[5, 15, 30], ArcVariant::V1).unwrap();
        assert!(avg.abs() < 1e-15);
    }

    #[test]
    fn combined_loss_arithmetic() {
        assert_eq!(combined_loss(0.7, 0.9, 0.0).unwrap(), 0.7);
        assert_eq!(combined_loss(0.5, 0.25, 2.0).unwrap(), 1.0);
        assert_eq!(combined_loss(0.5, 0.25, 42.0).unwrap(), 11.0);
        assert!(combined_loss(0.5, 0.25, -1.0).is_err());
    }

    #[test]
    fn reference_label_plans() {
        use crate::mixup::mix_batch_with;
        let inputs = Matrix::from_rows(&[vec![0.0, 0.0], vec![2.0, 2.0]]).unwrap();
        let labels = vec![0usize, 1];

        // gamma = 1: both modes reference t1
        let batch = mix_batch_with(&inputs, &labels, 2, &[1, 0], &[1.0, 1.0]).unwrap();
        match arc_reference_labels(&batch, ArcTarget::Mixed) {
            ArcEvalPlan::Mixed { reference_labels } => assert_eq!(reference_labels, vec![0, 1]),
            _ => unreachable!(),
        }
        match arc_reference_labels(&batch, ArcTarget::Originals) {
            ArcEvalPlan::Originals { first, second } => {
                assert_eq!(first, vec![0, 1]);
                assert_eq!(second, vec![1, 0]);
            }
            _ => unreachable!(),
        }

        // gamma = 0.5 ties toward t1
        let batch = mix_batch_with(&inputs, &labels, 2, &[1, 0], &[0.5, 0.5]).unwrap();
        match arc_reference_labels(&batch, ArcTarget::Mixed) {
            ArcEvalPlan::Mixed { reference_labels } => assert_eq!(reference_labels, vec![0, 1]),
            _ => unreachable!(),
        }

        // self-pairs: both evaluations coincide
        let batch = mix_batch_with(&inputs, &labels, 2, &[0, 1], &[0.3, 0.3]).unwrap();
        match arc_reference_labels(&batch, ArcTarget::Originals) {
            ArcEvalPlan::Originals { first, second } => assert_eq!(first, second),
            _ => unreachable!(),
        }
    }

    #[test]
    fn confidence_gradient_routes_through_argmax_row() {
        let probs = Matrix::from_rows(&[vec![0.2, 0.5, 0.3]]).unwrap();
        let d = confidence_grad_to_logits(&probs, &[1.0]);
        // dp_max/dz = p_k*(δ − p): [−0.1, 0.25, −0.15]
        assert!((d.at(0, 0) - (-0.5 * 0.2)).abs() < 1e-15);
        assert!((d.at(0, 1) - 0.5 * (1.0 - 0.5)).abs() < 1e-15);
        assert!((d.at(0, 2) - (-0.5 * 0.3)).abs() < 1e-15);
        // rows sum to zero: softmax outputs are scale-invariant
        let s: f64 = d.row(0).iter().sum();
        assert!(s.abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn arc_is_permutation_invariant_and_bounded(
            entries in prop::collection::vec((0.5f64..=1.0, any::<bool>()), 1..60),
            num_bins in 1usize..30,
            swap in any::<u64>(),
        ) {
            let recs = records(&entries);
            let partition = BinPartition::uniform(num_bins).unwrap();
            for variant in [ArcVariant::V1, ArcVariant::V2] {
                let (loss, _) = arc_loss(&recs, &partition, variant).unwrap();
                prop_assert!((0.0..=1.0).contains(&loss));

                let mut shuffled = recs.clone();
                let a = (swap % recs.len() as u64) as usize;
                let b = ((swap >> 32) % recs.len() as u64) as usize;
                shuffled.swap(a, b);
                shuffled.reverse();
                let (loss2, _) = arc_loss(&shuffled, &partition, variant).unwrap();
                prop_assert!((loss - loss2).abs() < 1e-12);
            }
        }

        #[test]
        fn v2_dominates_v1_at_single_bin(
            entries in prop::collection::vec((0.5f64..=1.0, any::<bool>()), 1..60),
        ) {
            let recs = records(&entries);
            let p = BinPartition::uniform(1).unwrap();
            let (v1, _) = arc_loss(&recs, &p, ArcVariant::V1).unwrap();
            let (v2, _) = arc_loss(&recs, &p, ArcVariant::V2).unwrap();
            prop_assert!(v2 >= v1 - 1e-12);
        }

        #[test]
        fn v1_equals_v2_for_constant_confidences(
            confidence in 0.5f64..=1.0,
            hits in prop::collection::vec(any::<bool>(), 1..40),
        ) {
            let recs: Vec<_> = hits
                .iter()
                .enumerate()
                .map(|(i, &hit)| ConfidenceRecord { sample_index: i, confidence, hit })
                .collect();
            let p = BinPartition::uniform(1).unwrap();
            let (v1, _) = arc_loss(&recs, &p, ArcVariant::V1).unwrap();
            let (v2, _) = arc_loss(&recs, &p, ArcVariant::V2).unwrap();
            prop_assert!((v1 - v2).abs() < 1e-12);
        }
    }
}
