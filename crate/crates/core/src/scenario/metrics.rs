//! Row-level evaluation metrics.

use crate::estim::classify_map;
use crate::error::Result;
use crate::mixture::{LabeledDataset, MixtureSpec, Observation};
use crate::params::{ParamLayout, ParamMask};

/// Arithmetic mean of per-class recalls. Classes absent from the truth are
/// excluded from the mean; equals plain accuracy on balanced ground truth.
pub fn balanced_accuracy(pred: &[usize], truth: &[usize], m: usize) -> f64 {
    assert_eq!(pred.len(), truth.len(), "prediction/truth length mismatch");
    let mut hit = vec![0usize; m];
    let mut count = vec![0usize; m];
    for (&p, &t) in pred.iter().zip(truth) {
        count[t] += 1;
        if p == t {
            hit[t] += 1;
        }
    }
    let mut acc = 0.0;
    let mut classes = 0;
    for j in 0..m {
        if count[j] > 0 {
            acc += hit[j] as f64 / count[j] as f64;
            classes += 1;
        }
    }
    if classes == 0 {
        0.0
    } else {
        acc / classes as f64
    }
}

pub fn plain_accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}

/// Euclidean distance between the free-parameter vectors of two specs.
pub fn param_distance(a: &MixtureSpec, b: &MixtureSpec, mask: &ParamMask) -> f64 {
    let layout = ParamLayout::masked(a, mask, mask.weights_free);
    (layout.pack(a) - layout.pack(b)).norm()
}

/// Per-component estimation bias `D_1 - D_2` over the components' own free
/// parameters (weights excluded).
pub fn class_bias(estimate: &MixtureSpec, actual: &MixtureSpec, mask: &ParamMask) -> f64 {
    let comp_distance = |j: usize| -> f64 {
        let mut acc = 0.0;
        for (idx, &free) in mask.component_free[j].iter().enumerate() {
            if free {
                let d = estimate.component(j).get_param(idx) - actual.component(j).get_param(idx);
                acc += d * d;
            }
        }
        acc.sqrt()
    };
    comp_distance(0) - comp_distance(1)
}

/// Mean squared prediction error of a mixture of regressors: each test pair
/// is assigned a component by the MAP rule and scored against that
/// component's regression line.
pub fn regression_mse(m: &MixtureSpec, data: &LabeledDataset) -> Result<f64> {
    let assign = classify_map(m, data)?;
    let mut acc = 0.0;
    for (s, &j) in data.samples.iter().zip(&assign) {
        if let Observation::Pair { x, y } = s {
            let b0 = m.component(j).get_param(0);
            let b1 = m.component(j).get_param(1);
            let r = y - b0 - b1 * x;
            acc += r * r;
        }
    }
    Ok(acc / data.len() as f64)
}
