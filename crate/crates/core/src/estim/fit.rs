//! The fit driver: single M-step for S and DCA, iterated E/M with the
//! parameter-change stopping rule for US, CA and WCA.

use super::{ca_mixing_estimator, e_step, incomplete_loglik, m_step, Algorithm, FitConfig};
use crate::error::Result;
use crate::mixture::{LabeledDataset, MixtureSpec};
use crate::params::{ParamLayout, ParamMask};
use nalgebra::{DMatrix, DVector};
use std::time::Instant;

/// Outcome of a fit: the final spec, the parameter trace and the final E-step
/// expectations.
#[derive(Debug, Clone)]
pub struct FitResult {
    /// Final mixture estimate. For CA the mixing weights come from the
    /// argmax-counting side estimator so the spec is complete for MAP use.
    pub spec: MixtureSpec,
    /// Ordered parameter vectors theta_0 .. theta_t over the full layout
    /// (length `iterations + 1`).
    pub theta_trace: Vec<DVector<f64>>,
    pub converged: bool,
    pub iterations: usize,
    /// Incomplete-data log-likelihood of the estimator's objective at the
    /// final spec.
    pub final_loglik: f64,
    /// E-step expectations at the final spec.
    pub responsibilities: DMatrix<f64>,
}

impl FitResult {
    /// Serializes to JSON; the trace is bulky and off by default.
    pub fn to_json(&self, include_trace: bool) -> serde_json::Value {
        let mut doc = serde_json::json!({
            "spec": self.spec,
            "converged": self.converged,
            "iterations": self.iterations,
            "final_loglik": self.final_loglik,
        });
        if include_trace {
            let trace: Vec<Vec<f64>> = self
                .theta_trace
                .iter()
                .map(|v| v.iter().copied().collect())
                .collect();
            doc["theta_trace"] = serde_json::json!(trace);
        }
        doc
    }
}

/// Runs the estimator from `init` on `data`.
///
/// S and DCA complete in exactly one M-step. US, CA and WCA iterate until the
/// Euclidean change of the ordered parameter vector drops below `config.tol`
/// or `config.max_iter` is reached; the cap estimate is returned with
/// `converged = false`.
pub fn fit(
    alg: &Algorithm,
    data: &LabeledDataset,
    init: &MixtureSpec,
    config: &FitConfig,
) -> Result<FitResult> {
    let default_mask = ParamMask::all_free(init);
    let mask = config.mask.as_ref().unwrap_or(&default_mask);
    // stopping-rule layout: weights participate only when the estimator
    // updates them
    let stop_layout = ParamLayout::masked(init, mask, alg.estimates_weights());
    let full_layout = ParamLayout::full(init);

    let mut trace = vec![full_layout.pack(init)];
    let mut spec = init.clone();

    let (converged, iterations) = match alg {
        Algorithm::Supervised | Algorithm::DirectContextAware(_) => {
            let resp = e_step(alg, &spec, data)?;
            spec = m_step(alg, &spec, data, &resp, config, 1)?;
            trace.push(full_layout.pack(&spec));
            (true, 1)
        }
        _ => {
            let start = Instant::now();
            let mut converged = false;
            let mut iterations = 0;
            for t in 1..=config.max_iter {
                let resp = e_step(alg, &spec, data)?;
                let next = m_step(alg, &spec, data, &resp, config, t)?;
                let delta = (stop_layout.pack(&next) - stop_layout.pack(&spec)).norm();
                spec = next;
                trace.push(full_layout.pack(&spec));
                iterations = t;
                if delta < config.tol {
                    converged = true;
                    break;
                }
                if let Some(budget) = config.iter_budget_ms {
                    if start.elapsed().as_millis() as u64 >= budget {
                        break;
                    }
                }
            }
            (converged, iterations)
        }
    };

    if let Algorithm::ContextAware(plabels) = alg {
        if mask.weights_free {
            let weights = ca_mixing_estimator(plabels);
            // the side estimator can produce hard zeros; nudge inside the
            // open simplex so the spec stays usable for MAP classification
            let floor = 1e-12;
            let mut w: Vec<f64> = weights.iter().map(|&v| v.max(floor)).collect();
            let sum: f64 = w.iter().sum();
            for v in w.iter_mut() {
                *v /= sum;
            }
            spec.weights_mut().copy_from_slice(&w);
            *trace.last_mut().unwrap() = full_layout.pack(&spec);
        }
    }

    let responsibilities = e_step(alg, &spec, data)?;
    let final_loglik = incomplete_loglik(alg, &spec, data)?;
    Ok(FitResult {
        spec,
        theta_trace: trace,
        converged,
        iterations,
        final_loglik,
    responsibilities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::{make_label, ProbLabel};
    use crate::mixture::{sample_mixture, ComponentParams};
    use crate::rng::derive_rng;
    use approx::assert_relative_eq;

    fn spec(mu1: f64, s1: f64, mu2: f64, s2: f64, w1: f64) -> MixtureSpec {
        MixtureSpec::new(
            vec![w1, 1.0 - w1],
            vec![
                ComponentParams::UnivariateNormal { mu: mu1, sigma: s1 },
                ComponentParams::UnivariateNormal { mu: mu2, sigma: s2 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn supervised_recovers_well_separated_parameters() {
        let truth = spec(-3.0, 0.8, 3.0, 1.2, 0.5);
        let data = sample_mixture(&truth, 100_000, &mut derive_rng(1, &[])).unwrap();
        let init = spec(-1.0, 1.0, 1.0, 1.0, 0.5);
        let r = fit(&Algorithm::Supervised, &data, &init, &FitConfig::default()).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
        assert_eq!(r.theta_trace.len(), 2);
        for (got, want) in [
            (r.spec.component(0).get_param(0), -3.0),
            (r.spec.component(0).get_param(1), 0.8),
            (r.spec.component(1).get_param(0), 3.0),
            (r.spec.component(1).get_param(1), 1.2),
        ] {
            assert!((got - want).abs() < 0.02, "got {got}, want {want}");
        }
    }

    #[test]
    fn one_hot_context_reduces_every_estimator_to_supervised() {
        let truth = spec(-1.0, 0.6, 1.4, 0.9, 0.4);
        let data = sample_mixture(&truth, 2000, &mut derive_rng(2, &[])).unwrap();
        let init = spec(-0.2, 1.0, 0.2, 1.0, 0.5);
        let labels: Vec<ProbLabel> = data.truth.iter().map(|&t| ProbLabel::one_hot(2, t)).collect();
        let cfg = FitConfig::default();
        let s = fit(&Algorithm::Supervised, &data, &init, &cfg).unwrap();
        for alg in [
            Algorithm::ContextAware(labels.clone()),
            Algorithm::WeightedContextAware(labels.clone()),
            Algorithm::DirectContextAware(labels),
        ] {
            let r = fit(&alg, &data, &init, &cfg).unwrap();
            let delta = (ParamLayout::full(&init).pack(&r.spec)
                - ParamLayout::full(&init).pack(&s.spec))
            .norm();
            assert!(delta < 1e-9, "{:?} deviates by {delta}", alg.tag());
        }
    }

    #[test]
    fn dca_estimate_ignores_initialization() {
        let truth = spec(-1.0, 0.6, 1.4, 0.9, 0.5);
        let data = sample_mixture(&truth, 500, &mut derive_rng(3, &[])).unwrap();
        let labels: Vec<ProbLabel> = data
            .truth
            .iter()
            .map(|&t| make_label(0.5, 2, t).unwrap())
            .collect();
        let cfg = FitConfig::default();
        let a = fit(
            &Algorithm::DirectContextAware(labels.clone()),
            &data,
            &spec(-5.0, 2.0, 5.0, 2.0, 0.3),
            &cfg,
        )
        .unwrap();
        let b = fit(
            &Algorithm::DirectContextAware(labels),
            &data,
            &spec(0.1, 0.2, 0.3, 0.4, 0.7),
            &cfg,
        )
        .unwrap();
        let layout = ParamLayout::full(&truth);
        assert_relative_eq!(layout.pack(&a.spec), layout.pack(&b.spec), epsilon = 1e-12);
    }

    #[test]
    fn fit_is_deterministic() {
        let truth = spec(-0.5, 0.8, 0.8, 1.1, 0.5);
        let data = sample_mixture(&truth, 400, &mut derive_rng(4, &[])).unwrap();
        let init = spec(-0.1, 1.0, 0.1, 1.0, 0.5);
        let cfg = FitConfig::default();
        let a = fit(&Algorithm::Unsupervised, &data, &init, &cfg).unwrap();
        let b = fit(&Algorithm::Unsupervised, &data, &init, &cfg).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.theta_trace, b.theta_trace);
        assert_eq!(a.final_loglik, b.final_loglik);
    }

    #[test]
    fn unconverged_fit_reports_cap() {
        let truth = spec(-0.2, 1.0, 0.2, 1.0, 0.5);
        let data = sample_mixture(&truth, 300, &mut derive_rng(5, &[])).unwrap();
        let init = spec(-1.0, 0.5, 1.0, 0.5, 0.5);
        let cfg = FitConfig {
            tol: 1e-14,
            max_iter: 5,
            ..FitConfig::default()
        };
        let r = fit(&Algorithm::Unsupervised, &data, &init, &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 5);
        assert_eq!(r.theta_trace.len(), 6);
    }

    #[test]
    fn monotone_ascent_on_gaussian_problem() {
        let truth = spec(-0.6, 0.7, 0.9, 1.3, 0.35);
        let data = sample_mixture(&truth, 600, &mut derive_rng(6, &[])).unwrap();
        let init = spec(0.4, 1.0, -0.4, 1.0, 0.5);
        let labels: Vec<ProbLabel> = data
            .truth
            .iter()
            .map(|&t| make_label(0.3, 2, t).unwrap())
            .collect();
        for alg in [
            Algorithm::Unsupervised,
            Algorithm::ContextAware(labels.clone()),
            Algorithm::WeightedContextAware(labels),
        ] {
            let r = fit(&alg, &data, &init, &FitConfig::default()).unwrap();
            let layout = ParamLayout::full(&init);
            let mut prev = f64::NEG_INFINITY;
            for v in &r.theta_trace {
                let m = layout.unpack(&init, v);
                let l = incomplete_loglik(&alg, &m, &data).unwrap();
                assert!(
                    l >= prev - 1e-9,
                    "{:?} log-likelihood decreased: {prev} -> {l}",
                    alg.tag()
                );
                prev = l;
            }
        }
    }

    #[test]
    fn ca_side_estimator_fills_weights() {
        let truth = spec(-2.0, 0.5, 2.0, 0.5, 0.5);
        let data = sample_mixture(&truth, 1000, &mut derive_rng(7, &[])).unwrap();
        let labels: Vec<ProbLabel> = data
            .truth
            .iter()
            .map(|&t| make_label(0.8, 2, t).unwrap())
            .collect();
        let init = spec(-1.0, 1.0, 1.0, 1.0, 0.3);
        let r = fit(&Algorithm::ContextAware(labels.clone()), &data, &init, &FitConfig::default())
            .unwrap();
        let expect = ca_mixing_estimator(&labels);
        assert_relative_eq!(r.spec.weights()[0], expect[0], epsilon = 1e-9);
    }
}
