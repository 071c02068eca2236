//! Shared fixtures for the criterion benchmarks.

use ctxmix_core::labels::{make_context_labels, ContextMode, ProbLabel};
use ctxmix_core::mixture::{sample_mixture, ComponentParams, LabeledDataset, MixtureSpec};
use ctxmix_core::rng::derive_rng;

/// A moderately overlapping two-Gaussian problem at the harness's scale.
pub fn two_gaussian_problem(n: usize, seed: u64) -> (MixtureSpec, MixtureSpec, LabeledDataset) {
    let actual = MixtureSpec::new(
        vec![0.5, 0.5],
        vec![
            ComponentParams::UnivariateNormal { mu: 0.0, sigma: 0.4 },
            ComponentParams::UnivariateNormal { mu: 0.9, sigma: 0.5 },
        ],
    )
    .unwrap();
    let init = MixtureSpec::new(
        vec![0.5, 0.5],
        vec![
            ComponentParams::UnivariateNormal { mu: 0.3, sigma: 0.5 },
            ComponentParams::UnivariateNormal { mu: 0.6, sigma: 0.4 },
        ],
    )
    .unwrap();
    let data = sample_mixture(&actual, n, &mut derive_rng(seed, &[1])).unwrap();
    (actual, init, data)
}

/// Correct-context labels for the dataset at one negentropy level.
pub fn correct_labels(data: &LabeledDataset, ne: f64, seed: u64) -> Vec<ProbLabel> {
    make_context_labels(
        &data.truth,
        2,
        ContextMode::Correct,
        ne,
        &mut derive_rng(seed, &[2]),
    )
    .unwrap()
}
