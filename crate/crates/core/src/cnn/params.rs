use alloc::vec::Vec;

use super::{CLASSES, KERNEL};
use crate::image::{CHANNELS, FACE_SIZE};
use crate::rng;

/// Channel widths of the two convolution layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Architecture {
    pub c1: usize,
    pub c2: usize,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture { c1: 8, c2: 16 }
    }
}

impl Architecture {
    pub fn new(c1: usize, c2: usize) -> Self {
        Architecture { c1, c2 }
    }

    /// Flattened feature count entering the fully connected layer.
    pub fn features(&self) -> usize {
        self.c2 * (FACE_SIZE / 4) * (FACE_SIZE / 4)
    }

    /// Lengths of conv1 weights, conv1 biases, conv2 weights, conv2 biases,
    /// fc weights and fc biases, in declaration order.
    pub fn shapes(&self) -> [usize; 6] {
        [
            self.c1 * CHANNELS * KERNEL * KERNEL,
            self.c1,
            self.c2 * self.c1 * KERNEL * KERNEL,
            self.c2,
            CLASSES * self.features(),
            CLASSES,
        ]
    }

    pub fn param_count(&self) -> usize {
        self.shapes().iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamsError {
    #[error("parameter block {block} has {actual} values, expected {expected}")]
    Shape { block: usize, expected: usize, actual: usize },
    #[error("parameter block {block} contains a non-finite value at {index}")]
    NonFinite { block: usize, index: usize },
}

/// Weights and biases of the network, all `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub(crate) arch: Architecture,
    pub(crate) conv1_w: Vec<f64>,
    pub(crate) conv1_b: Vec<f64>,
    pub(crate) conv2_w: Vec<f64>,
    pub(crate) conv2_b: Vec<f64>,
    pub(crate) fc_w: Vec<f64>,
    pub(crate) fc_b: Vec<f64>,
}

impl NetworkParams {
    pub fn zeros(arch: Architecture) -> Self {
        let [a, b, c, d, e, f] = arch.shapes().map(|n| alloc::vec![0.0; n]);
        NetworkParams { arch, conv1_w: a, conv1_b: b, conv2_w: c, conv2_b: d, fc_w: e, fc_b: f }
    }

    /// Glorot-uniform weights, `U(-sqrt(6 / (fan_in + fan_out)), +...)`,
    /// and zero biases.
    pub fn init(arch: Architecture, seed: u64) -> Self {
        let mut params = Self::zeros(arch);
        let mut stream = rng::stream(seed, &[0x1417]);
        let k2 = KERNEL * KERNEL;
        let fans = [
            (CHANNELS * k2, arch.c1 * k2),
            (arch.c1 * k2, arch.c2 * k2),
            (arch.features(), CLASSES),
        ];
        let weights = [&mut params.conv1_w, &mut params.conv2_w, &mut params.fc_w];
        for (w, (fan_in, fan_out)) in weights.into_iter().zip(fans) {
            let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
            for v in w.iter_mut() {
                *v = (2.0 * rng::open_unit(&mut stream) - 1.0) * limit;
            }
        }
        params
    }

    /// Assembles parameters from blocks in declaration order, checking
    /// shapes and finiteness.
    pub fn from_blocks(arch: Architecture, blocks: [Vec<f64>; 6]) -> Result<Self, ParamsError> {
        for (block, (values, expected)) in blocks.iter().zip(arch.shapes()).enumerate() {
            if values.len() != expected {
                return Err(ParamsError::Shape { block, expected, actual: values.len() });
            }
            if let Some(index) = values.iter().position(|v| !v.is_finite()) {
                return Err(ParamsError::NonFinite { block, index });
            }
        }
        let [a, b, c, d, e, f] = blocks;
        Ok(NetworkParams { arch, conv1_w: a, conv1_b: b, conv2_w: c, conv2_b: d, fc_w: e, fc_b: f })
    }

    pub fn arch(&self) -> Architecture {
        self.arch
    }

    /// Parameter blocks in declaration order.
    pub fn blocks(&self) -> [&[f64]; 6] {
        [&self.conv1_w, &self.conv1_b, &self.conv2_w, &self.conv2_b, &self.fc_w, &self.fc_b]
    }

    pub fn blocks_mut(&mut self) -> [&mut [f64]; 6] {
        [
            &mut self.conv1_w,
            &mut self.conv1_b,
            &mut self.conv2_w,
            &mut self.conv2_b,
            &mut self.fc_w,
            &mut self.fc_b,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    pub(crate) fn sgd_step(&mut self, grads: &NetworkParams, learning_rate: f64) {
        for (p, g) in self.blocks_mut().into_iter().zip(grads.blocks()) {
            for (w, d) in p.iter_mut().zip(g) {
                *w -= learning_rate * d;
            }
        }
    }
}
