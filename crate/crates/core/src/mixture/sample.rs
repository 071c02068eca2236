//! Sampling from mixture specifications.

use super::{ComponentParams, LabeledDataset, MixtureSpec, Observation};
use crate::error::{Error, Result};
use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

/// Knobs for the parts of sampling the family itself does not determine.
#[derive(Debug, Clone, Copy)]
pub struct SampleConfig {
    /// Regressor covariates are drawn uniformly from this interval.
    pub covariate_range: (f64, f64),
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            covariate_range: (-3.0, 3.0),
        }
    }
}

/// One draw from a single component.
pub fn sample_component(
    c: &ComponentParams,
    cfg: &SampleConfig,
    rng: &mut impl Rng,
) -> Observation {
    match c {
        ComponentParams::UnivariateNormal { mu, sigma } => {
            Observation::Scalar(mu + sigma * rng.sample::<f64, _>(StandardNormal))
        }
        ComponentParams::MultivariateNormal { mu, .. } => {
            let cov = c.cov_matrix().unwrap();
            let chol = nalgebra::Cholesky::new(cov).expect("validated covariance");
            let d = mu.len();
            let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
            let x = DVector::from_column_slice(mu) + chol.l() * z;
            Observation::Vector(x.iter().copied().collect())
        }
        ComponentParams::MaxwellBoltzmann { a } => {
            // norm of a 3-d isotropic Gaussian with per-axis deviation a
            let mut s = 0.0;
            for _ in 0..3 {
                let z: f64 = rng.sample(StandardNormal);
                s += z * z;
            }
            Observation::Scalar(a * s.sqrt())
        }
        ComponentParams::LinearRegressor { beta0, beta1, eps } => {
            let (lo, hi) = cfg.covariate_range;
            let x = rng.gen_range(lo..hi);
            let y = beta0 + beta1 * x + eps * rng.sample::<f64, _>(StandardNormal);
            Observation::Pair { x, y }
        }
    }
}

/// `n` iid draws from the mixture; the generating component is recorded as the
/// ground truth. Deterministic for a fixed generator state.
pub fn sample_mixture(m: &MixtureSpec, n: usize, rng: &mut impl Rng) -> Result<LabeledDataset> {
    sample_mixture_with(m, n, &SampleConfig::default(), rng)
}

pub fn sample_mixture_with(
    m: &MixtureSpec,
    n: usize,
    cfg: &SampleConfig,
    rng: &mut impl Rng,
) -> Result<LabeledDataset> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "need at least one sample".to_string(),
        });
    }
    let mut samples = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    for _ in 0..n {
        let j = pick_component(m.weights(), rng);
        truth.push(j);
        samples.push(sample_component(m.component(j), cfg, rng));
    }
    LabeledDataset::new(samples, truth)
}

pub(crate) fn pick_component(weights: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (j, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return j;
        }
    }
    weights.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::tests::two_gaussians;
    use crate::rng::derive_rng;

    #[test]
    fn law_of_large_numbers_single_component() {
        let m = two_gaussians(0.0, 1.0, 0.0, 1.0, 0.5);
        let mut rng = derive_rng(1, &[0]);
        let data = sample_mixture(&m, 100_000, &mut rng).unwrap();
        let values: Vec<f64> = data.samples.iter().map(|s| s.as_scalar().unwrap()).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var.sqrt() - 1.0).abs() < 0.01, "std {}", var.sqrt());
    }

    #[test]
    fn binomial_concentration_of_class_fractions() {
        let m = two_gaussians(0.0, 1.0, 5.0, 1.0, 0.3);
        let mut rng = derive_rng(2, &[0]);
        let data = sample_mixture(&m, 100_000, &mut rng).unwrap();
        let frac1 = data.truth.iter().filter(|&&t| t == 0).count() as f64 / data.len() as f64;
        assert!((frac1 - 0.3).abs() < 0.005, "class-1 fraction {frac1}");
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let m = two_gaussians(0.0, 0.5, 2.0, 1.5, 0.4);
        let a = sample_mixture(&m, 500, &mut derive_rng(7, &[3])).unwrap();
        let b = sample_mixture(&m, 500, &mut derive_rng(7, &[3])).unwrap();
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn truth_conditioned_moments_track_components() {
        let m = two_gaussians(-1.0, 0.5, 3.0, 1.2, 0.5);
        let mut rng = derive_rng(11, &[4]);
        let n = 50_000;
        let data = sample_mixture(&m, n, &mut rng).unwrap();
        for (j, (mu, sigma)) in [(-1.0, 0.5), (3.0, 1.2)].iter().enumerate() {
            let vals: Vec<f64> = data
                .samples
                .iter()
                .zip(&data.truth)
                .filter(|(_, &t)| t == j)
                .map(|(s, _)| s.as_scalar().unwrap())
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let bound = 4.0 * sigma / (vals.len() as f64).sqrt();
            assert!((mean - mu).abs() < bound, "class {j} mean {mean}");
        }
    }

    #[test]
    fn regressor_covariate_range_is_respected() {
        let m = MixtureSpec::new(
            vec![0.5, 0.5],
            vec![
                ComponentParams::LinearRegressor {
                    beta0: 0.0,
                    beta1: 1.0,
                    eps: 0.5,
                },
                ComponentParams::LinearRegressor {
                    beta0: 1.0,
                    beta1: -1.0,
                    eps: 0.5,
                },
            ],
        )
        .unwrap();
        let mut rng = derive_rng(3, &[9]);
        let data = sample_mixture(&m, 2000, &mut rng).unwrap();
        for s in &data.samples {
            let (x, _) = s.as_pair().unwrap();
            assert!((-3.0..3.0).contains(&x));
        }
    }
}
