use alloc::vec::Vec;

use super::{forward_planar, to_planar, CnnError, NetworkParams};
use crate::gender::Gender;
use crate::image::FaceTensor;

/// Confusion counts with respect to a designated positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn tally(predicted: &[Gender], actual: &[Gender], positive: Gender) -> Self {
        let mut c = Confusion::default();
        for (&p, &a) in predicted.iter().zip(actual) {
            match (p == positive, a == positive) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub confusion: Confusion,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl EvalMetrics {
    /// Ratios with an empty denominator are reported as 0.
    pub fn from_confusion(c: Confusion) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        EvalMetrics { precision, recall, f1, accuracy: ratio(c.tp + c.tn, c.total()), confusion: c }
    }
}

/// Scores argmax predictions against labels, `positive` being the class
/// for precision and recall.
pub fn evaluate(
    params: &NetworkParams,
    validation: &[(FaceTensor, Gender)],
    positive: Gender,
) -> Result<EvalMetrics, CnnError> {
    if validation.is_empty() {
        return Err(CnnError::EmptyBatch);
    }
    let inputs: Vec<Vec<f64>> = validation.iter().map(|(t, _)| to_planar(t)).collect();
    let predicted: Vec<Gender> = forward_planar(params, &inputs).iter().map(super::argmax).collect();
    let actual: Vec<Gender> = validation.iter().map(|&(_, g)| g).collect();
    Ok(EvalMetrics::from_confusion(Confusion::tally(&predicted, &actual, positive)))
}
