//! Synthetic classification data with analytically known posteriors, plus
//! CSV ingestion and deterministic splitting.
//!
//! The Gaussian-mixture generators make calibration claims testable: the
//! true posterior `p(k|x)` is available in closed form, so metrics can be
//! checked against a predictor that is calibrated by construction.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng as _;
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{self, Purpose, Rng};

/// One mixture component: an isotropic Gaussian with a class prior.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    pub mean: Vec<f64>,
    /// Isotropic standard deviation.
    pub sigma: f64,
    pub prior: f64,
}

/// A labelled Gaussian mixture: the data-generating distribution used by
/// the synthetic benchmarks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianMixtureSpec {
    pub classes: Vec<ClassSpec>,
}

impl GaussianMixtureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Error::InvalidConfig("mixture needs at least one class".into()));
        }
        let dim = self.classes[0].mean.len();
        if dim == 0 {
            return Err(Error::InvalidConfig("class means need at least one feature".into()));
        }
        let mut prior_sum = 0.0;
        for (k, c) in self.classes.iter().enumerate() {
            if c.mean.len() != dim {
                return Err(Error::InvalidConfig(format!(
                    "class {k} mean has {} features, expected {dim}",
                    c.mean.len()
                )));
            }
            if c.sigma <= 0.0 || c.sigma.is_nan() {
                return Err(Error::InvalidConfig(format!("class {k} sigma must be positive")));
            }
            if c.prior <= 0.0 || c.prior.is_nan() {
                return Err(Error::InvalidConfig(format!("class {k} prior must be positive")));
            }
            prior_sum += c.prior;
        }
        if (prior_sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "priors sum to {prior_sum}, expected 1"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.classes[0].mean.len()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// Two equally likely classes at `(−1, 0)` and `(1, 0)` with unit
    /// variance. Heavy class overlap; the optimal decision rule is right
    /// about 84% of the time.
    pub fn overlap2d() -> Self {
        GaussianMixtureSpec {
            classes: vec![
                ClassSpec { mean: vec![-1.0, 0.0], sigma: 1.0, prior: 0.5 },
                ClassSpec { mean: vec![1.0, 0.0], sigma: 1.0, prior: 0.5 },
            ],
        }
    }

    /// Eight classes on a circle of radius 2 with σ = 0.7. Neighboring
    /// classes overlap and the class layout is deliberately non-linear, so
    /// straight-line interpolation between samples crosses regions that
    /// belong to neither endpoint class.
    pub fn ring8() -> Self {
        let classes = (0..8)
            .map(|k| {
                let angle = 2.0 * std::f64::consts::PI * k as f64 / 8.0;
                ClassSpec {
                    mean: vec![2.0 * angle.cos(), 2.0 * angle.sin()],
                    sigma: 0.7,
                    prior: 0.125,
                }
            })
            .collect();
        GaussianMixtureSpec { classes }
    }

    /// Looks up a built-in benchmark spec.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "overlap2d" => Some(Self::overlap2d()),
            "ring8" => Some(Self::ring8()),
            _ => None,
        }
    }
}

/// Feature rows with integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub inputs: Matrix,
    pub labels: Vec<usize>,
    pub num_classes: usize,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.cols()
    }

    /// The subset at the given row indices, in order.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            inputs: self.inputs.gather_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
        }
    }
}

/// Draws `n` i.i.d. samples: class from the priors, then features from that
/// class's Gaussian. Deterministic per RNG state.
pub fn sample_dataset(spec: &GaussianMixtureSpec, n: usize, rng: &mut Rng) -> Result<LabeledDataset> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidInput("cannot sample an empty dataset".into()));
    }
    let dim = spec.dim();
    let mut inputs = Matrix::zeros(n, dim);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let u: f64 = rng.random();
        let mut cumulative = 0.0;
        let mut class = spec.classes.len() - 1;
        for (k, c) in spec.classes.iter().enumerate() {
            cumulative += c.prior;
            if u < cumulative {
                class = k;
                break;
            }
        }
        let c = &spec.classes[class];
        let row = inputs.row_mut(i);
        for (v, &m) in row.iter_mut().zip(&c.mean) {
            let z: f64 = StandardNormal.sample(rng);
            *v = m + c.sigma * z;
        }
        labels.push(class);
    }
    Ok(LabeledDataset {
        inputs,
        labels,
        num_classes: spec.num_classes(),
    })
}

/// Exact class posterior `p(k|x)` of the mixture, computed in log space.
pub fn true_posterior(spec: &GaussianMixtureSpec, x: &[f64]) -> Vec<f64> {
    // log p(k|x) ∝ log prior − d·log σ − ||x−μ||²/(2σ²); normalize by
    // log-sum-exp so heavily separated classes stay finite.
    let d = x.len() as f64;
    let logs: Vec<f64> = spec
        .classes
        .iter()
        .map(|c| {
            let mut sq = 0.0;
            for (v, m) in x.iter().zip(&c.mean) {
                sq += (v - m) * (v - m);
            }
            c.prior.ln() - d * c.sigma.ln() - sq / (2.0 * c.sigma * c.sigma)
        })
        .collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for v in &mut out {
        *v /= sum;
    }
    out
}

/// Posterior rows for every sample of a dataset.
pub fn posterior_matrix(spec: &GaussianMixtureSpec, inputs: &Matrix) -> Matrix {
    let mut probs = Matrix::zeros(inputs.rows(), spec.num_classes());
    for i in 0..inputs.rows() {
        let row = true_posterior(spec, inputs.row(i));
        probs.row_mut(i).copy_from_slice(&row);
    }
    probs
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesErrorEstimate {
    pub error: f64,
    pub std_error: f64,
}

/// Monte-Carlo estimate of the irreducible error `1 − E[maxₖ p(k|x)]`.
///
/// Intended for `n_mc ≥ 10⁴`; the standard error reported is that of the
/// mean of `1 − maxₖ p(k|x)` over the draws.
pub fn bayes_error_estimate(
    spec: &GaussianMixtureSpec,
    n_mc: usize,
    rng: &mut Rng,
) -> Result<BayesErrorEstimate> {
    let data = sample_dataset(spec, n_mc, rng)?;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for i in 0..n_mc {
        let post = true_posterior(spec, data.inputs.row(i));
        let miss = 1.0 - post.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        sum += miss;
        sum_sq += miss * miss;
    }
    let n = n_mc as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok(BayesErrorEstimate {
        error: mean,
        std_error: (var / n).sqrt(),
    })
}

/// Train/validation/test fractions plus the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub fractions: (f64, f64, f64),
    pub seed: u64,
    /// Allocate per class instead of globally.
    #[serde(default)]
    pub stratified: bool,
}

impl SplitSpec {
    pub fn new(train: f64, validation: f64, test: f64, seed: u64) -> Self {
        SplitSpec {
            fractions: (train, validation, test),
            seed,
            stratified: false,
        }
    }

    fn validate(&self) -> Result<()> {
        let (a, b, c) = self.fractions;
        for f in [a, b, c] {
            if !(0.0 < f && f < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "split fraction {f} must lie in (0, 1)"
                )));
            }
        }
        if (a + b + c - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "split fractions sum to {}, expected 1",
                a + b + c
            )));
        }
        Ok(())
    }
}

fn allocate(n: usize, fractions: (f64, f64, f64)) -> (usize, usize, usize) {
    let n_train = (fractions.0 * n as f64).round() as usize;
    let n_val = (fractions.1 * n as f64).round() as usize;
    let n_train = n_train.min(n);
    let n_val = n_val.min(n - n_train);
    (n_train, n_val, n - n_train - n_val)
}

/// Index partition behind `split`, exposed so callers can audit
/// disjointness directly.
pub fn split_indices(
    labels: &[usize],
    spec: &SplitSpec,
) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    let n = labels.len();
    let mut rng = rng::stream(spec.seed, Purpose::Split);

    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());
    if spec.stratified {
        let num_classes = labels.iter().max().map_or(0, |&m| m + 1);
        for class in 0..num_classes {
            let mut members: Vec<usize> =
                (0..n).filter(|&i| labels[i] == class).collect();
            members.shuffle(&mut rng);
            let (a, b, _) = allocate(members.len(), spec.fractions);
            train.extend_from_slice(&members[..a]);
            val.extend_from_slice(&members[a..a + b]);
            test.extend_from_slice(&members[a + b..]);
        }
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let (a, b, _) = allocate(n, spec.fractions);
        train = order[..a].to_vec();
        val = order[a..a + b].to_vec();
        test = order[a + b..].to_vec();
    }
    if train.is_empty() || val.is_empty() || test.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "split of {n} samples leaves an empty part ({}/{}/{})",
            train.len(),
            val.len(),
            test.len()
        )));
    }
    Ok((train, val, test))
}

/// Deterministic shuffled partition into train/validation/test. The three
/// parts are disjoint and their union is the whole dataset.
pub fn split(
    dataset: &LabeledDataset,
    spec: &SplitSpec,
) -> Result<(LabeledDataset, LabeledDataset, LabeledDataset)> {
    let (train, val, test) = split_indices(&dataset.labels, spec)?;
    Ok((
        dataset.subset(&train),
        dataset.subset(&val),
        dataset.subset(&test),
    ))
}

/// Loads a dataset from CSV: `d` numeric feature columns followed by one
/// integer label column, with an optional header row.
pub fn load_csv(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text)
}

pub(crate) fn parse_csv(text: &str) -> Result<LabeledDataset> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut width = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if rows.is_empty() && width.is_none() && fields.iter().any(|f| f.parse::<f64>().is_err())
        {
            // header row
            width = Some(fields.len());
            continue;
        }
        if let Some(w) = width {
            if fields.len() != w {
                return Err(Error::InputFormat {
                    line: line_no,
                    message: format!("expected {w} fields, found {}", fields.len()),
                });
            }
        } else {
            if fields.len() < 2 {
                return Err(Error::InputFormat {
                    line: line_no,
                    message: "need at least one feature column and a label column".into(),
                });
            }
            width = Some(fields.len());
        }
        let (feature_fields, label_field) = fields.split_at(fields.len() - 1);
        let mut features = Vec::with_capacity(feature_fields.len());
        for f in feature_fields {
            let v: f64 = f.parse().map_err(|_| Error::InputFormat {
                line: line_no,
                message: format!("cannot parse feature value {f:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::InputFormat {
                    line: line_no,
                    message: format!("non-finite feature value {f:?}"),
                });
            }
            features.push(v);
        }
        let label: usize = label_field[0].parse().map_err(|_| Error::InputFormat {
            line: line_no,
            message: format!("cannot parse label {:?} as a nonnegative integer", label_field[0]),
        })?;
        rows.push(features);
        labels.push(label);
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("CSV contains no data rows".into()));
    }
    let num_classes = labels.iter().max().unwrap() + 1;
    Ok(LabeledDataset {
        inputs: Matrix::from_rows(&rows)?,
        labels,
        num_classes,
    })
}

/// Serializes a dataset as CSV with an `f0,...,f{d−1},label` header.
pub fn dataset_to_csv(dataset: &LabeledDataset) -> String {
    let d = dataset.dim();
    let mut out = String::new();
    for k in 0..d {
        let _ = write!(out, "f{k},");
    }
    out.push_str("label\n");
    for i in 0..dataset.len() {
        for v in dataset.inputs.row(i) {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{}", dataset.labels[i]);
    }
    out
}

/// Parses a predictions CSV: `C` probability columns followed by an integer
/// label column, optional header. Probability rows must sum to 1 within
/// 1e-6.
pub fn parse_predictions(text: &str) -> Result<(Matrix, Vec<usize>)> {
    let parsed = parse_csv(text)?;
    for i in 0..parsed.len() {
        let sum: f64 = parsed.inputs.row(i).iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "probability row {} sums to {sum}, expected 1",
                i + 1
            )));
        }
        if parsed.inputs.row(i).iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidInput(format!("negative probability in row {}", i + 1)));
        }
        if parsed.labels[i] >= parsed.inputs.cols() {
            return Err(Error::InvalidInput(format!(
                "label {} out of range for {} probability columns",
                parsed.labels[i],
                parsed.inputs.cols()
            )));
        }
    }
    Ok((parsed.inputs, parsed.labels))
}
