//! Mixup: convex combinations of input pairs and their one-hot targets.
//!
//! Partners are chosen by a uniform random permutation of the batch, one
//! interpolation weight `γ ~ Beta(β, β)` is drawn per pair and shared across
//! features and labels, and the original pair members are kept so a loss can
//! still be evaluated on the unmixed inputs.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::Rng;

/// One mixed batch with full provenance.
#[derive(Debug, Clone)]
pub struct MixupBatch {
    /// `x̃[i] = γ[i]·x1[i] + (1−γ[i])·x2[i]`
    pub x_tilde: Matrix,
    /// Soft targets: `γ·onehot(t1) + (1−γ)·onehot(t2)`, rows sum to 1 with
    /// at most two nonzero entries.
    pub t_tilde: Matrix,
    pub x1: Matrix,
    pub x2: Matrix,
    pub t1: Vec<usize>,
    pub t2: Vec<usize>,
    pub gamma: Vec<f64>,
}

/// One draw from `Beta(beta_mix, beta_mix)`.
///
/// Sampled as the normalized ratio of two `Gamma(beta_mix, 1)` draws, which
/// stays correct for shapes below 1 where the Gamma sampler switches to its
/// small-shape boost.
pub fn sample_gamma(beta_mix: f64, rng: &mut Rng) -> Result<f64> {
    if beta_mix <= 0.0 || beta_mix.is_nan() {
        return Err(Error::InvalidConfig(format!(
            "beta_mix must be positive, got {beta_mix}"
        )));
    }
    let gamma = Gamma::new(beta_mix, 1.0)
        .map_err(|e| Error::InvalidConfig(format!("bad Beta shape {beta_mix}: {e}")))?;
    loop {
        let a = gamma.sample(rng);
        let b = gamma.sample(rng);
        let sum = a + b;
        if sum > 0.0 {
            return Ok(a / sum);
        }
        // both draws underflowed to zero; astronomically rare, retry
    }
}

/// Deterministic core of `mix_batch`: the partner permutation and the
/// interpolation weights are supplied by the caller.
pub fn mix_batch_with(
    inputs: &Matrix,
    labels: &[usize],
    num_classes: usize,
    partner: &[usize],
    gammas: &[f64],
) -> Result<MixupBatch> {
    let n = inputs.rows();
    if n == 0 {
        return Err(Error::InvalidInput("cannot mix an empty batch".into()));
    }
    if labels.len() != n || partner.len() != n || gammas.len() != n {
        return Err(Error::ShapeMismatch(
            "labels, partners and gammas must match the batch size".into(),
        ));
    }
    if let Some(&bad) = labels.iter().find(|&&t| t >= num_classes) {
        return Err(Error::InvalidInput(format!(
            "label {bad} out of range for {num_classes} classes"
        )));
    }

    let x1 = inputs.clone();
    let x2 = inputs.gather_rows(partner);
    let t1 = labels.to_vec();
    let t2: Vec<usize> = partner.iter().map(|&j| labels[j]).collect();

    let mut x_tilde = Matrix::zeros(n, inputs.cols());
    let mut t_tilde = Matrix::zeros(n, num_classes);
    for i in 0..n {
        let g = gammas[i];
        let (a, b) = (x1.row(i), x2.row(i));
        let out = x_tilde.row_mut(i);
        for k in 0..out.len() {
            out[k] = g * a[k] + (1.0 - g) * b[k];
        }
        let trow = t_tilde.row_mut(i);
        if t1[i] == t2[i] {
            trow[t1[i]] = 1.0;
        } else {
            trow[t1[i]] = g;
            trow[t2[i]] = 1.0 - g;
        }
    }
    Ok(MixupBatch {
        x_tilde,
        t_tilde,
        x1,
        x2,
        t1,
        t2,
        gamma: gammas.to_vec(),
    })
}

/// Mixes a batch: partners come from a uniform random permutation of the
/// batch itself and one `γ ~ Beta(beta_mix, beta_mix)` is drawn per pair.
pub fn mix_batch(
    inputs: &Matrix,
    labels: &[usize],
    num_classes: usize,
    beta_mix: f64,
    rng: &mut Rng,
) -> Result<MixupBatch> {
    let n = inputs.rows();
    if n == 0 {
        return Err(Error::InvalidInput("cannot mix an empty batch".into()));
    }
    let mut partner: Vec<usize> = (0..n).collect();
    partner.shuffle(rng);
    let gammas: Vec<f64> = (0..n)
        .map(|_| sample_gamma(beta_mix, rng))
        .collect::<Result<_>>()?;
    mix_batch_with(inputs, labels, num_classes, &partner, &gammas)
}
