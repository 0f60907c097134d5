//! A small convolutional gender classifier trained from scratch.
//!
//! Architecture, for a 28x28x3 input:
//!
//! ```text
//! conv 5x5 (pad 2) -> ReLU -> maxpool 2x2
//! conv 5x5 (pad 2) -> ReLU -> maxpool 2x2
//! flatten (C2 x 7 x 7) -> affine -> softmax over {male, female}
//! ```
//!
//! All arithmetic is in `f64`. Training is plain minibatch SGD on the mean
//! softmax cross-entropy.

mod layers;
mod metrics;
mod params;

use alloc::vec::Vec;

pub use metrics::{evaluate, Confusion, EvalMetrics};
pub use params::{Architecture, NetworkParams, ParamsError};

use crate::gender::Gender;
use crate::image::{FaceTensor, CHANNELS, FACE_SIZE};
use crate::rng;
use layers::{conv_backward, conv_forward, maxpool_backward, maxpool_forward};

pub const CLASSES: usize = 2;
pub const KERNEL: usize = 5;
pub const PADDING: usize = 2;
const POOLED1: usize = FACE_SIZE / 2;

/// Converts an HWC face tensor to the CHW layout used by the layers.
pub fn to_planar(tensor: &FaceTensor) -> Vec<f64> {
    let mut out = alloc::vec![0.0; CHANNELS * FACE_SIZE * FACE_SIZE];
    for (i, px) in tensor.data().chunks_exact(CHANNELS).enumerate() {
        for (c, &v) in px.iter().enumerate() {
            out[c * FACE_SIZE * FACE_SIZE + i] = v as f64;
        }
    }
    out
}

/// Intermediate activations of one example, kept for backpropagation.
struct Trace {
    a1: Vec<f64>,
    p1: Vec<f64>,
    arg1: Vec<usize>,
    a2: Vec<f64>,
    p2: Vec<f64>,
    arg2: Vec<usize>,
    logits: [f64; CLASSES],
}

fn relu_in_place(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

fn run(params: &NetworkParams, input: &[f64]) -> Trace {
    let Architecture { c1, c2 } = params.arch;
    let a1 = conv_forward(input, CHANNELS, FACE_SIZE, &params.conv1_w, &params.conv1_b, c1);
    let mut r1 = a1.clone();
    relu_in_place(&mut r1);
    let (p1, arg1) = maxpool_forward(&r1, c1, FACE_SIZE);
    let a2 = conv_forward(&p1, c1, POOLED1, &params.conv2_w, &params.conv2_b, c2);
    let mut r2 = a2.clone();
    relu_in_place(&mut r2);
    let (p2, arg2) = maxpool_forward(&r2, c2, POOLED1);
    let features = p2.len();
    let mut logits = [0.0; CLASSES];
    for (k, logit) in logits.iter_mut().enumerate() {
        let row = &params.fc_w[k * features..(k + 1) * features];
        *logit = params.fc_b[k] + row.iter().zip(&p2).map(|(w, x)| w * x).sum::<f64>();
    }
    Trace { a1, p1, arg1, a2, p2, arg2, logits }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64; CLASSES]) -> [f64; CLASSES] {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps = logits.map(|l| libm::exp(l - max));
    let sum: f64 = exps.iter().sum();
    exps.map(|e| e / sum)
}

fn log_sum_exp(logits: &[f64; CLASSES]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + libm::log(logits.iter().map(|l| libm::exp(l - max)).sum::<f64>())
}

/// Class probabilities `[P(male), P(female)]` for each planar input.
pub fn forward_planar(params: &NetworkParams, inputs: &[Vec<f64>]) -> Vec<[f64; CLASSES]> {
    inputs.iter().map(|x| softmax(&run(params, x).logits)).collect()
}

/// Class probabilities `[P(male), P(female)]` for each face tensor.
pub fn forward(params: &NetworkParams, batch: &[FaceTensor]) -> Vec<[f64; CLASSES]> {
    batch.iter().map(|t| softmax(&run(params, &to_planar(t)).logits)).collect()
}

/// Most probable class for each face tensor.
pub fn predict(params: &NetworkParams, batch: &[FaceTensor]) -> Vec<Gender> {
    forward(params, batch).iter().map(argmax).collect()
}

pub(crate) fn argmax(probs: &[f64; CLASSES]) -> Gender {
    if probs[1] > probs[0] {
        Gender::Female
    } else {
        Gender::Male
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CnnError {
    #[error("empty batch")]
    EmptyBatch,
    #[error("batch has {inputs} inputs but {labels} labels")]
    LabelCount { inputs: usize, labels: usize },
    #[error("input has {0} values, expected {expected}", expected = CHANNELS * FACE_SIZE * FACE_SIZE)]
    InputShape(usize),
    #[error("non-finite loss {loss} at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize, loss: f64 },
    #[error("invalid training config: {0}")]
    Config(&'static str),
}

/// Mean softmax cross-entropy over a batch and its exact gradient.
pub fn loss_and_gradients(
    params: &NetworkParams,
    inputs: &[Vec<f64>],
    labels: &[Gender],
) -> Result<(f64, NetworkParams), CnnError> {
    if inputs.is_empty() {
        return Err(CnnError::EmptyBatch);
    }
    if inputs.len() != labels.len() {
        return Err(CnnError::LabelCount { inputs: inputs.len(), labels: labels.len() });
    }
    let expected = CHANNELS * FACE_SIZE * FACE_SIZE;
    if let Some(bad) = inputs.iter().find(|x| x.len() != expected) {
        return Err(CnnError::InputShape(bad.len()));
    }
    let mut grads = NetworkParams::zeros(params.arch);
    let scale = 1.0 / inputs.len() as f64;
    let mut loss = 0.0;
    for (input, &label) in inputs.iter().zip(labels) {
        loss += backprop(params, input, label, scale, &mut grads);
    }
    Ok((loss * scale, grads))
}

/// Accumulates `scale * d(loss)/d(params)` for one example into `grads` and
/// returns its unscaled loss.
fn backprop(params: &NetworkParams, input: &[f64], label: Gender, scale: f64, grads: &mut NetworkParams) -> f64 {
    let Architecture { c1, c2 } = params.arch;
    let t = run(params, input);
    let loss = log_sum_exp(&t.logits) - t.logits[label.index()];

    let mut dlogits = softmax(&t.logits);
    dlogits[label.index()] -= 1.0;
    let dlogits = dlogits.map(|d| d * scale);

    let features = t.p2.len();
    let mut dp2 = alloc::vec![0.0; features];
    for (k, &d) in dlogits.iter().enumerate() {
        grads.fc_b[k] += d;
        let gw = &mut grads.fc_w[k * features..(k + 1) * features];
        let w = &params.fc_w[k * features..(k + 1) * features];
        for i in 0..features {
            gw[i] += d * t.p2[i];
            dp2[i] += d * w[i];
        }
    }

    let mut da2 = maxpool_backward(&dp2, &t.arg2, c2 * POOLED1 * POOLED1);
    for (g, &a) in da2.iter_mut().zip(&t.a2) {
        if a <= 0.0 {
            *g = 0.0;
        }
    }
    let dp1 = conv_backward(&t.p1, c1, POOLED1, &params.conv2_w, &da2, c2, &mut grads.conv2_w, &mut grads.conv2_b, true);

    let mut da1 = maxpool_backward(&dp1, &t.arg1, c1 * FACE_SIZE * FACE_SIZE);
    for (g, &a) in da1.iter_mut().zip(&t.a1) {
        if a <= 0.0 {
            *g = 0.0;
        }
    }
    conv_backward(input, CHANNELS, FACE_SIZE, &params.conv1_w, &da1, c1, &mut grads.conv1_w, &mut grads.conv1_b, false);
    loss
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub arch: Architecture,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { learning_rate: 0.05, batch_size: 64, epochs: 10, seed: 0, arch: Architecture::default() }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), CnnError> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(CnnError::Config("learning_rate must be a finite non-negative number"));
        }
        if self.batch_size == 0 {
            return Err(CnnError::Config("batch_size must be positive"));
        }
        if self.epochs == 0 {
            return Err(CnnError::Config("epochs must be positive"));
        }
        if self.arch.c1 == 0 || self.arch.c2 == 0 {
            return Err(CnnError::Config("channel widths must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput {
    pub params: NetworkParams,
    /// Mean training loss of each epoch, as seen during that epoch's updates.
    pub loss_trace: Vec<f64>,
}

/// Trains from a seeded initialization with seeded per-epoch shuffling.
pub fn train(data: &[(FaceTensor, Gender)], config: &TrainConfig) -> Result<TrainOutput, CnnError> {
    let params = NetworkParams::init(config.arch, config.seed);
    train_from(params, data, config)
}

/// Continues SGD from `params`.
pub fn train_from(
    mut params: NetworkParams,
    data: &[(FaceTensor, Gender)],
    config: &TrainConfig,
) -> Result<TrainOutput, CnnError> {
    config.validate()?;
    if data.is_empty() {
        return Err(CnnError::EmptyBatch);
    }
    let inputs: Vec<Vec<f64>> = data.iter().map(|(t, _)| to_planar(t)).collect();
    let labels: Vec<Gender> = data.iter().map(|&(_, g)| g).collect();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut loss_trace = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let mut stream = rng::stream(config.seed, &[0x5EED, epoch as u64]);
        rng::shuffle(&mut stream, &mut order);
        let mut total = 0.0;
        for (batch_index, batch) in order.chunks(config.batch_size).enumerate() {
            let mut grads = NetworkParams::zeros(params.arch);
            let scale = 1.0 / batch.len() as f64;
            let mut loss = 0.0;
            for &i in batch {
                loss += backprop(&params, &inputs[i], labels[i], scale, &mut grads);
            }
            if !loss.is_finite() {
                return Err(CnnError::NonFiniteLoss { epoch, batch: batch_index, loss: loss * scale });
            }
            total += loss;
            params.sgd_step(&grads, config.learning_rate);
        }
        loss_trace.push(total / data.len() as f64);
    }
    Ok(TrainOutput { params, loss_trace })
}
