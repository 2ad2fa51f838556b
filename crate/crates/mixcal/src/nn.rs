//! Feed-forward classifier with hand-derived gradients.
//!
//! The network is a plain MLP: ReLU hidden layers, linear output layer.
//! `forward` caches activations, `backward` turns a loss gradient with
//! respect to the logits into exact parameter gradients, and `sgd_step`
//! applies momentum SGD with L2 weight decay folded into the gradient.
//! Everything is `f64` so that central-difference gradient checks resolve
//! against the analytic path, and everything is deterministic under a fixed
//! seed.

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{self, Purpose, Rng};

/// One dense layer: `weights` is `[out×in]`, `biases` has length `out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

/// All trainable parameters of the classifier.
///
/// Also serves as the gradient container: `backward` returns a `ParamSet`
/// of identical shape holding `dLoss/dθ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    pub layers: Vec<Layer>,
    pub layer_sizes: Vec<usize>,
}

impl ParamSet {
    /// A parameter set of the same shape with every entry zero.
    pub fn zeros_like(&self) -> ParamSet {
        ParamSet {
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    weights: Matrix::zeros(l.weights.rows(), l.weights.cols()),
                    biases: vec![0.0; l.biases.len()],
                })
                .collect(),
            layer_sizes: self.layer_sizes.clone(),
        }
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.data().len() + l.biases.len())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.is_finite() && l.biases.iter().all(|b| b.is_finite()))
    }

    /// Flat coordinate access, weights then biases per layer. Used by the
    /// gradient checker.
    pub fn coord(&self, mut index: usize) -> f64 {
        for layer in &self.layers {
            let w = layer.weights.data().len();
            if index < w {
                return layer.weights.data()[index];
            }
            index -= w;
            if index < layer.biases.len() {
                return layer.biases[index];
            }
            index -= layer.biases.len();
        }
        panic!("parameter coordinate out of range");
    }

    pub fn coord_add(&mut self, mut index: usize, delta: f64) {
        for layer in &mut self.layers {
            let w = layer.weights.data().len();
            if index < w {
                layer.weights.data_mut()[index] += delta;
                return;
            }
            index -= w;
            if index < layer.biases.len() {
                layer.biases[index] += delta;
                return;
            }
            index -= layer.biases.len();
        }
        panic!("parameter coordinate out of range");
    }

    /// `self += scale · other`, entrywise. Shapes must match.
    pub fn add_scaled(&mut self, other: &ParamSet, scale: f64) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.weights.data_mut().iter_mut().zip(b.weights.data()) {
                *x += scale * y;
            }
            for (x, y) in a.biases.iter_mut().zip(&b.biases) {
                *x += scale * y;
            }
        }
    }
}

/// Momentum-SGD state. Buffers mirror the `ParamSet` shape exactly.
#[derive(Debug, Clone)]
pub struct SgdState {
    pub momentum_buffers: ParamSet,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub step_count: usize,
}

impl SgdState {
    pub fn new(params: &ParamSet, learning_rate: f64, momentum: f64, weight_decay: f64) -> Result<Self> {
        if learning_rate <= 0.0 {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&momentum) {
            return Err(Error::InvalidConfig("momentum must lie in [0, 1)".into()));
        }
        if weight_decay < 0.0 {
            return Err(Error::InvalidConfig("weight decay must be nonnegative".into()));
        }
        Ok(SgdState {
            momentum_buffers: params.zeros_like(),
            learning_rate,
            momentum,
            weight_decay,
            step_count: 0,
        })
    }
}

/// Initializes an MLP with the given layer widths.
///
/// Weights are i.i.d. zero-mean normal with variance `2/fan_in`, biases are
/// zero. The same `(layer_sizes, seed)` yields a bit-identical network.
pub fn init_network(layer_sizes: &[usize], seed: u64) -> Result<ParamSet> {
    if layer_sizes.len() < 2 {
        return Err(Error::InvalidConfig(
            "layer_sizes needs an input and an output width".into(),
        ));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::InvalidConfig("layer sizes must be positive".into()));
    }
    let mut rng = rng::stream(seed, Purpose::Init);
    let mut layers = Vec::with_capacity(layer_sizes.len() - 1);
    for pair in layer_sizes.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("finite std");
        let data: Vec<f64> = (0..fan_out * fan_in).map(|_| normal.sample(&mut rng)).collect();
        layers.push(Layer {
            weights: Matrix::from_vec(fan_out, fan_in, data)?,
            biases: vec![0.0; fan_out],
        });
    }
    Ok(ParamSet {
        layers,
        layer_sizes: layer_sizes.to_vec(),
    })
}

/// Activations retained by `forward` for the matching `backward` call.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each layer: `layer_inputs[0]` is the batch itself, then the
    /// post-ReLU activations of each hidden layer.
    layer_inputs: Vec<Matrix>,
    /// Pre-activation of each layer; the last entry is the logits.
    pre_activations: Vec<Matrix>,
    layer_sizes: Vec<usize>,
}

impl ForwardCache {
    pub fn batch_size(&self) -> usize {
        self.layer_inputs[0].rows()
    }

    pub fn pre_activation(&self, layer: usize) -> &Matrix {
        &self.pre_activations[layer]
    }
}

/// Runs the network on a batch. Returns logits (`[n×C]`) and the cache
/// needed by `backward`.
pub fn forward(params: &ParamSet, inputs: &Matrix) -> Result<(Matrix, ForwardCache)> {
    if inputs.cols() != params.layer_sizes[0] {
        return Err(Error::ShapeMismatch(format!(
            "input has {} features, network expects {}",
            inputs.cols(),
            params.layer_sizes[0]
        )));
    }
    let num_layers = params.layers.len();
    let mut layer_inputs = Vec::with_capacity(num_layers);
    let mut pre_activations = Vec::with_capacity(num_layers);
    let mut current = inputs.clone();
    for (l, layer) in params.layers.iter().enumerate() {
        let mut z = current.mul_transpose(&layer.weights)?;
        for i in 0..z.rows() {
            let row = z.row_mut(i);
            for (v, b) in row.iter_mut().zip(&layer.biases) {
                *v += b;
            }
        }
        layer_inputs.push(current);
        pre_activations.push(z.clone());
        if l + 1 < num_layers {
            for v in z.data_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        current = z;
    }
    let logits = current;
    Ok((
        logits,
        ForwardCache {
            layer_inputs,
            pre_activations,
            layer_sizes: params.layer_sizes.clone(),
        },
    ))
}

/// Row-wise softmax with max-subtraction, safe for logits up to ±700 and
/// beyond: rows always sum to 1 and stay finite.
pub fn softmax(logits: &Matrix) -> Matrix {
    let mut probs = logits.clone();
    for i in 0..probs.rows() {
        let row = probs.row_mut(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    probs
}

/// Backpropagates `dLoss/dLogits` through the cached forward pass.
///
/// Returns exact gradients for the scalar loss whose logit gradient was
/// supplied, in a `ParamSet` of the same shape as `params`.
pub fn backward(params: &ParamSet, cache: &ForwardCache, dloss_dlogits: &Matrix) -> Result<ParamSet> {
    if cache.layer_sizes != params.layer_sizes || cache.layer_inputs.len() != params.layers.len() {
        return Err(Error::ContractViolation(
            "forward cache does not match this parameter set".into(),
        ));
    }
    let n = cache.batch_size();
    let classes = *params.layer_sizes.last().unwrap();
    if dloss_dlogits.rows() != n || dloss_dlogits.cols() != classes {
        return Err(Error::ContractViolation(format!(
            "logit gradient is {}x{}, cache holds a batch of {n} with {classes} classes",
            dloss_dlogits.rows(),
            dloss_dlogits.cols()
        )));
    }

    let mut grads = params.zeros_like();
    let mut delta = dloss_dlogits.clone();
    for l in (0..params.layers.len()).rev() {
        let input = &cache.layer_inputs[l];
        let glayer = &mut grads.layers[l];
        for i in 0..n {
            let drow = delta.row(i);
            let xrow = input.row(i);
            for (j, &coeff) in drow.iter().enumerate() {
                glayer.biases[j] += coeff;
                if coeff != 0.0 {
                    let wrow = glayer.weights.row_mut(j);
                    for (w, &x) in wrow.iter_mut().zip(xrow) {
                        *w += coeff * x;
                    }
                }
            }
        }
        if l > 0 {
            // delta for the layer below: (delta · W) gated by the ReLU mask
            // of that layer's output (input[i][k] > 0 iff pre-activation > 0).
            let weights = &params.layers[l].weights;
            let mut next = Matrix::zeros(n, weights.cols());
            for i in 0..n {
                let drow = delta.row(i);
                let out_row = next.row_mut(i);
                for (j, &coeff) in drow.iter().enumerate() {
                    if coeff != 0.0 {
                        for (o, &w) in out_row.iter_mut().zip(weights.row(j)) {
                            *o += coeff * w;
                        }
                    }
                }
                let mask_row = input.row(i);
                for (o, &a) in out_row.iter_mut().zip(mask_row) {
                    if a <= 0.0 {
                        *o = 0.0;
                    }
                }
            }
            delta = next;
        }
    }
    Ok(grads)
}

/// One momentum-SGD update:
/// `buffer ← momentum·buffer + (grad + weight_decay·param)`,
/// `param ← param − lr·buffer`.
pub fn sgd_step(params: &mut ParamSet, grads: &ParamSet, state: &mut SgdState) -> Result<()> {
    if grads.layer_sizes != params.layer_sizes {
        return Err(Error::ShapeMismatch(
            "gradient shape does not match parameters".into(),
        ));
    }
    if !grads.is_finite() {
        // the epoch index is filled in by the training loop
        return Err(Error::TrainingDiverged { epoch: 0 });
    }
    for ((layer, glayer), buf) in params
        .layers
        .iter_mut()
        .zip(&grads.layers)
        .zip(&mut state.momentum_buffers.layers)
    {
        for ((p, &g), b) in layer
            .weights
            .data_mut()
            .iter_mut()
            .zip(glayer.weights.data())
            .zip(buf.weights.data_mut())
        {
            *b = state.momentum * *b + (g + state.weight_decay * *p);
            *p -= state.learning_rate * *b;
        }
        for ((p, &g), b) in layer
            .biases
            .iter_mut()
            .zip(&glayer.biases)
            .zip(buf.biases.iter_mut())
        {
            *b = state.momentum * *b + (g + state.weight_decay * *p);
            *p -= state.learning_rate * *b;
        }
    }
    state.step_count += 1;
    Ok(())
}

/// Compares an analytic gradient against central finite differences on a
/// random subsample of at least 100 coordinates (all of them for small
/// nets). Returns the maximum relative error observed.
///
/// `loss` must recompute the full scalar loss from scratch at the given
/// parameters; `analytic` is the gradient under test, evaluated at `params`.
pub fn grad_check<F>(
    params: &ParamSet,
    mut loss: F,
    analytic: &ParamSet,
    eps: f64,
    rng: &mut Rng,
) -> f64
where
    F: FnMut(&ParamSet) -> f64,
{
    assert!(eps > 0.0, "finite-difference step must be positive");
    let total = params.num_params();
    let take = total.min(128);
    let indices = rand::seq::index::sample(rng, total, take);

    let mut max_rel = 0.0_f64;
    for idx in indices {
        let mut plus = params.clone();
        plus.coord_add(idx, eps);
        let mut minus = params.clone();
        minus.coord_add(idx, -eps);
        let numeric = (loss(&plus) - loss(&minus)) / (2.0 * eps);
        let a = analytic.coord(idx);
        let denom = a.abs().max(numeric.abs());
        if denom < 1e-7 {
            continue; // both effectively zero
        }
        max_rel = max_rel.max((a - numeric).abs() / denom);
    }
    max_rel
}
