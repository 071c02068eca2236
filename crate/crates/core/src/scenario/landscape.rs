//! Log-likelihood landscape tracing for a one-free-parameter mixture, with
//! the first-iteration EM lower-bound curves.

use crate::error::Result;
use crate::estim::{fit, incomplete_loglik, q_and_entropy, Algorithm, AlgorithmTag, FitConfig};
use crate::labels::{make_context_labels, ContextMode, ProbLabel};
use crate::mixture::{sample_mixture, ComponentParams, LabeledDataset, MixtureSpec};
use crate::params::ParamMask;
use crate::rng::derive_rng;

/// The traced setup: two univariate Gaussians with everything fixed except
/// the first mean.
#[derive(Debug, Clone)]
pub struct LandscapeConfig {
    pub pi1: f64,
    pub mu1_true: f64,
    pub mu2: f64,
    pub s1: f64,
    pub s2: f64,
    pub n: usize,
    pub mu1_init: f64,
    /// Negentropy levels traced for CA, WCA and DCA (CA at level 0 is always
    /// included as the ignorant-context curve).
    pub ne_set: Vec<f64>,
    pub grid_start: f64,
    pub grid_end: f64,
    pub grid_points: usize,
    pub seed: u64,
}

impl Default for LandscapeConfig {
    fn default() -> Self {
        Self {
            pi1: 0.1,
            mu1_true: 0.0,
            mu2: 1.0,
            s1: 0.5,
            s2: 3.0,
            n: 100,
            mu1_init: 2.0,
            ne_set: vec![0.7],
            grid_start: -3.0,
            grid_end: 4.0,
            grid_points: 400,
            seed: 17,
        }
    }
}

/// One grid point of one curve. `q_plus_h` is the first-iteration lower
/// bound anchored at the initial point for the EM estimators; for DCA it is
/// the single-shot objective (no entropy term, no tangency).
#[derive(Debug, Clone, serde::Serialize)]
pub struct LandscapePoint {
    /// "US", "CAE", "CA", "WCA" or "DCA".
    pub curve: &'static str,
    pub ne: Option<f64>,
    pub mu1: f64,
    pub loglik: f64,
    pub q_plus_h: Option<f64>,
    /// Converged estimate of the free mean.
    pub mu1_hat: f64,
    /// Estimate after the first iteration.
    pub mu1_first: f64,
}

fn curve_name(tag: AlgorithmTag, ne: f64) -> &'static str {
    match tag {
        AlgorithmTag::US => "US",
        AlgorithmTag::CA if ne == 0.0 => "CAE",
        AlgorithmTag::CA => "CA",
        AlgorithmTag::WCA => "WCA",
        AlgorithmTag::DCA => "DCA",
        AlgorithmTag::S => "S",
    }
}

/// Traces `logL(mu1)` and the first-iteration bound for US, the ignorant
/// context curve, and CA/WCA/DCA at each configured negentropy.
pub fn landscape(cfg: &LandscapeConfig) -> Result<Vec<LandscapePoint>> {
    let truth_spec = spec_with(cfg, cfg.mu1_true)?;
    let mut rng = derive_rng(cfg.seed, &[0x1a2d]);
    let data = sample_mixture(&truth_spec, cfg.n, &mut rng)?;
    let init = spec_with(cfg, cfg.mu1_init)?;
    let mask = ParamMask::only(&init, &[(0, 0)]);
    let fit_cfg = FitConfig::default().with_mask(mask);

    let mut curves: Vec<(AlgorithmTag, f64, Algorithm)> =
        vec![(AlgorithmTag::US, 0.0, Algorithm::Unsupervised)];
    // the ignorant-context curve is always drawn
    let zero_labels = correct_labels(cfg, &data, 0.0)?;
    curves.push((AlgorithmTag::CA, 0.0, Algorithm::ContextAware(zero_labels)));
    for &ne in &cfg.ne_set {
        let labels = correct_labels(cfg, &data, ne)?;
        if ne != 0.0 {
            curves.push((AlgorithmTag::CA, ne, Algorithm::ContextAware(labels.clone())));
        }
        curves.push((
            AlgorithmTag::WCA,
            ne,
            Algorithm::WeightedContextAware(labels.clone()),
        ));
        curves.push((AlgorithmTag::DCA, ne, Algorithm::DirectContextAware(labels)));
    }

    let mut out = Vec::new();
    for (tag, ne, alg) in &curves {
        let fitted = fit(alg, &data, &init, &fit_cfg)?;
        let mu1_hat = fitted.spec.component(0).get_param(0);
        let mu1_first = {
            // trace entries are full parameter vectors: pi1, mu1, s1, mu2, s2
            let v = &fitted.theta_trace[1.min(fitted.theta_trace.len() - 1)];
            v[1]
        };
        for g in 0..cfg.grid_points {
            let mu1 = cfg.grid_start
                + (cfg.grid_end - cfg.grid_start) * g as f64 / (cfg.grid_points - 1) as f64;
            let at = spec_with(cfg, mu1)?;
            let loglik = incomplete_loglik(alg, &at, &data)?;
            let q_plus_h = match tag {
                AlgorithmTag::DCA => {
                    let (q, _h) = q_and_entropy(alg, &init, &at, &data)?;
                    Some(q)
                }
                _ => {
                    let (q, h) = q_and_entropy(alg, &init, &at, &data)?;
                    Some(q + h)
                }
            };
            out.push(LandscapePoint {
                curve: curve_name(*tag, *ne),
                ne: (*tag != AlgorithmTag::US).then_some(*ne),
                mu1,
                loglik,
                q_plus_h,
                mu1_hat,
                mu1_first,
            });
        }
    }
    Ok(out)
}

fn spec_with(cfg: &LandscapeConfig, mu1: f64) -> Result<MixtureSpec> {
    MixtureSpec::new(
        vec![cfg.pi1, 1.0 - cfg.pi1],
        vec![
            ComponentParams::UnivariateNormal { mu: mu1, sigma: cfg.s1 },
            ComponentParams::UnivariateNormal {
                mu: cfg.mu2,
                sigma: cfg.s2,
            },
        ],
    )
}

fn correct_labels(cfg: &LandscapeConfig, data: &LabeledDataset, ne: f64) -> Result<Vec<ProbLabel>> {
    let mut rng = derive_rng(cfg.seed, &[0x1ab5, crate::rng::f64_coord(ne)]);
    make_context_labels(&data.truth, 2, ContextMode::Correct, ne, &mut rng)
}
