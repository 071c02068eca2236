//! Random estimation problems: actual and initial mixtures at drawn
//! separability levels plus stratified train/test datasets.

use super::{ScenarioId, ScenarioSpec};
use crate::error::{Error, Result};
use crate::mixture::{
    sample_component, solve_param_for_kl, ComponentParams, FreeAxis, KlDirection, LabeledDataset,
    MixtureSpec, SampleConfig,
};
use crate::params::ParamMask;
use crate::rng::derive_rng;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const MAX_ATTEMPTS: usize = 200;
const PROBLEM_STREAM: u64 = 0x70;

/// A fully generated estimation problem.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub actual: MixtureSpec,
    pub init: MixtureSpec,
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub mask: ParamMask,
    /// Drawn separability levels between adjacent actual components.
    pub skl: Vec<f64>,
    /// Drawn separability levels between initial and actual components.
    pub ikl: Vec<f64>,
    /// Regeneration attempts consumed by failed root solves.
    pub retries: usize,
}

/// Number of free parameters, which sets the dataset cardinality at 100 per
/// parameter.
fn free_param_count(id: ScenarioId) -> usize {
    match id {
        ScenarioId::A => 2,
        ScenarioId::B | ScenarioId::Mixed | ScenarioId::Wrong | ScenarioId::Biased => 5,
        ScenarioId::C => 8,
        ScenarioId::D => 11,
        ScenarioId::E => 3,
        ScenarioId::F => 7,
    }
}

/// Dataset size: 100 samples per free parameter, rounded up to a multiple of
/// the class count so balanced scenarios get exactly equal class counts.
pub(crate) fn dataset_size(id: ScenarioId) -> usize {
    let m = id.n_components();
    let n = 100 * free_param_count(id);
    n.div_ceil(m) * m
}

/// Generates problem `idx` of the scenario. Failed KL root solves regenerate
/// the draw; the retry count is recorded on the instance.
pub fn generate_problem(spec: &ScenarioSpec, idx: usize) -> Result<ProblemInstance> {
    let mut retries = 0;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = derive_rng(
            spec.master_seed,
            &[PROBLEM_STREAM, spec.id.code(), idx as u64, attempt as u64],
        );
        match try_generate(spec, &mut rng) {
            Ok(mut p) => {
                p.retries = retries;
                return Ok(p);
            }
            Err(Error::NoRoot) => {
                retries += 1;
                continue;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoRoot)
}

fn try_generate(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> Result<ProblemInstance> {
    let id = spec.id;
    let m = id.n_components();
    let weights_actual: Vec<f64> = if id == ScenarioId::Biased {
        vec![spec.pi1, 1.0 - spec.pi1]
    } else {
        vec![1.0 / m as f64; m]
    };
    let weights_init = vec![1.0 / m as f64; m];

    let (actual_comps, init_comps, mask_spec, skl, ikl) = match id {
        ScenarioId::A => {
            let (comps, skl) = gaussian_actual(rng, 2, 0.1..3.0)?;
            // deviations are known; only the means move
            let mut ikl = Vec::new();
            let mut init = Vec::new();
            for c in &comps {
                let target = rng.gen_range(0.1..3.0);
                let tmpl = c.clone();
                init.push(solve_param_for_kl(
                    c,
                    &tmpl,
                    target,
                    FreeAxis::Mean,
                    KlDirection::NewFromFixed,
                    rng,
                )?);
                ikl.push(target);
            }
            (comps, init, MaskSpec::MeansOnly, skl, ikl)
        }
        ScenarioId::B | ScenarioId::Mixed | ScenarioId::Wrong | ScenarioId::Biased => {
            let (comps, skl) = gaussian_actual(rng, 2, 0.1..3.0)?;
            let (init, ikl) = gaussian_init(rng, &comps, 0.1..3.0)?;
            (comps, init, MaskSpec::AllFree, skl, ikl)
        }
        ScenarioId::C => {
            let (comps, skl) = gaussian_actual(rng, 3, 3.0..20.0)?;
            let (init, ikl) = gaussian_init(rng, &comps, 0.1..1.0)?;
            (comps, init, MaskSpec::AllFree, skl, ikl)
        }
        ScenarioId::D => {
            let mu1: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..1.0)).collect();
            let cov1 = random_covariance(2, rng);
            let comp1 = ComponentParams::MultivariateNormal { mu: mu1, cov: cov1 };
            let target = rng.gen_range(0.1..3.0);
            let template = ComponentParams::MultivariateNormal {
                mu: vec![0.0, 0.0],
                cov: random_covariance(2, rng),
            };
            let comp2 = solve_param_for_kl(
                &comp1,
                &template,
                target,
                FreeAxis::Mean,
                KlDirection::NewFromFixed,
                rng,
            )?;
            let comps = vec![comp1, comp2];
            let mut init = Vec::new();
            let mut ikl = Vec::new();
            for c in &comps {
                let t = rng.gen_range(0.1..3.0);
                let tmpl = ComponentParams::MultivariateNormal {
                    mu: vec![0.0, 0.0],
                    cov: random_covariance(2, rng),
                };
                init.push(solve_param_for_kl(
                    c,
                    &tmpl,
                    t,
                    FreeAxis::Mean,
                    KlDirection::NewFromFixed,
                    rng,
                )?);
                ikl.push(t);
            }
            (comps, init, MaskSpec::AllFree, vec![target], ikl)
        }
        ScenarioId::E => {
            let a1 = rng.gen_range(1.0..6.0);
            let comp1 = ComponentParams::MaxwellBoltzmann { a: a1 };
            let target = rng.gen_range(0.1..3.0);
            let comp2 = solve_param_for_kl(
                &comp1,
                &comp1.clone(),
                target,
                FreeAxis::Scale,
                KlDirection::NewFromFixed,
                rng,
            )?;
            let comps = vec![comp1, comp2];
            let mut init = Vec::new();
            let mut ikl = Vec::new();
            for c in &comps {
                let t = rng.gen_range(0.1..3.0);
                init.push(solve_param_for_kl(
                    c,
                    &c.clone(),
                    t,
                    FreeAxis::Scale,
                    KlDirection::NewFromFixed,
                    rng,
                )?);
                ikl.push(t);
            }
            (comps, init, MaskSpec::AllFree, vec![target], ikl)
        }
        ScenarioId::F => {
            let draw = |rng: &mut ChaCha8Rng| ComponentParams::LinearRegressor {
                beta0: rng.gen_range(-1.0..1.0),
                beta1: rng
                    .gen_range(-std::f64::consts::FRAC_PI_3..std::f64::consts::FRAC_PI_3)
                    .tan(),
                eps: rng.gen_range(0.5..2.0),
            };
            let comps = vec![draw(rng), draw(rng)];
            let init = vec![draw(rng), draw(rng)];
            (comps, init, MaskSpec::AllFree, Vec::new(), Vec::new())
        }
    };

    let actual = MixtureSpec::new(weights_actual, actual_comps)?;
    let init = MixtureSpec::new(weights_init, init_comps)?;
    let mask = match mask_spec {
        MaskSpec::AllFree => ParamMask::all_free(&actual),
        MaskSpec::MeansOnly => ParamMask::only(&actual, &[(0, 0), (1, 0)]),
    };

    let n = dataset_size(id);
    let train = stratified_sample(&actual, n, rng)?;
    let test = stratified_sample(&actual, n, rng)?;

    Ok(ProblemInstance {
        actual,
        init,
        train,
        test,
        mask,
        skl,
        ikl,
        retries: 0,
    })
}

enum MaskSpec {
    AllFree,
    MeansOnly,
}

/// Actual Gaussian components: first mean in [0, 1], deviations in
/// [0.1, 0.6], later means solved so each component sits at the drawn
/// separability from its predecessor.
fn gaussian_actual(
    rng: &mut ChaCha8Rng,
    m: usize,
    skl_range: std::ops::Range<f64>,
) -> Result<(Vec<ComponentParams>, Vec<f64>)> {
    let mut comps = vec![ComponentParams::UnivariateNormal {
        mu: rng.gen_range(0.0..1.0),
        sigma: rng.gen_range(0.1..0.6),
    }];
    let mut skl = Vec::new();
    for _ in 1..m {
        let target = rng.gen_range(skl_range.clone());
        let template = ComponentParams::UnivariateNormal {
            mu: 0.0,
            sigma: rng.gen_range(0.1..0.6),
        };
        let prev = comps.last().unwrap().clone();
        comps.push(solve_param_for_kl(
            &prev,
            &template,
            target,
            FreeAxis::Mean,
            KlDirection::NewFromFixed,
            rng,
        )?);
        skl.push(target);
    }
    Ok((comps, skl))
}

fn gaussian_init(
    rng: &mut ChaCha8Rng,
    actual: &[ComponentParams],
    ikl_range: std::ops::Range<f64>,
) -> Result<(Vec<ComponentParams>, Vec<f64>)> {
    let mut init = Vec::new();
    let mut ikl = Vec::new();
    for c in actual {
        let target = rng.gen_range(ikl_range.clone());
        let template = ComponentParams::UnivariateNormal {
            mu: 0.0,
            sigma: rng.gen_range(0.1..0.6),
        };
        init.push(solve_param_for_kl(
            c,
            &template,
            target,
            FreeAxis::Mean,
            KlDirection::NewFromFixed,
            rng,
        )?);
        ikl.push(target);
    }
    Ok((init, ikl))
}

/// Random symmetric positive definite matrix: eigenvalues uniform on
/// [0, 0.5] floored at 1e-3, eigenbasis from the Q factor of a Gaussian
/// matrix.
fn random_covariance(d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let gauss = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = gauss.qr().q();
    let eigs: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0f64..0.5).max(1e-3)).collect();
    let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eigs));
    let cov = &q * lambda * q.transpose();
    (0..d)
        .map(|r| {
            (0..d)
                .map(|c| if r <= c { cov[(r, c)] } else { cov[(c, r)] })
                .collect()
        })
        .collect()
}

/// Exact per-class counts (proportional to the weights, equal for balanced
/// specs), shuffled into a single dataset.
pub(crate) fn stratified_sample(
    m: &MixtureSpec,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<LabeledDataset> {
    let k = m.n_components();
    let mut counts: Vec<usize> = m
        .weights()
        .iter()
        .map(|w| (w * n as f64).round() as usize)
        .collect();
    let total: usize = counts.iter().sum();
    // push any rounding slack onto the largest class
    let largest = (0..k)
        .max_by(|&a, &b| m.weights()[a].total_cmp(&m.weights()[b]))
        .unwrap();
    if total > n {
        counts[largest] -= total - n;
    } else {
        counts[largest] += n - total;
    }
    let cfg = SampleConfig::default();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut samples = vec![None; n];
    let mut truth = vec![0usize; n];
    let mut pos = 0;
    for (j, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            let slot = order[pos];
            samples[slot] = Some(sample_component(m.component(j), &cfg, rng));
            truth[slot] = j;
            pos += 1;
        }
    }
    LabeledDataset::new(samples.into_iter().map(Option::unwrap).collect(), truth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::component_kl;

    fn spec(id: ScenarioId) -> ScenarioSpec {
        ScenarioSpec::new(id, 4, 99)
    }

    #[test]
    fn dataset_sizes_follow_parameter_rule() {
        assert_eq!(dataset_size(ScenarioId::A), 200);
        assert_eq!(dataset_size(ScenarioId::B), 500);
        // 800 rounded up to a multiple of three
        assert_eq!(dataset_size(ScenarioId::C), 801);
        assert_eq!(dataset_size(ScenarioId::D), 1100);
        assert_eq!(dataset_size(ScenarioId::E), 300);
        assert_eq!(dataset_size(ScenarioId::F), 700);
    }

    #[test]
    fn generation_is_deterministic() {
        let s = spec(ScenarioId::B);
        let a = generate_problem(&s, 2).unwrap();
        let b = generate_problem(&s, 2).unwrap();
        assert_eq!(a.actual, b.actual);
        assert_eq!(a.init, b.init);
        assert_eq!(a.train.samples, b.train.samples);
        assert_eq!(a.test.truth, b.test.truth);
    }

    #[test]
    fn separability_targets_hold() {
        for id in [ScenarioId::B, ScenarioId::C, ScenarioId::E] {
            let s = spec(id);
            let p = generate_problem(&s, 0).unwrap();
            for (j, &target) in p.skl.iter().enumerate() {
                let got = component_kl(p.actual.component(j + 1), p.actual.component(j)).unwrap();
                assert!(
                    (got - target).abs() < 1e-7,
                    "{id:?} pair {j}: {got} vs {target}"
                );
            }
            for (j, &target) in p.ikl.iter().enumerate() {
                let got = component_kl(p.init.component(j), p.actual.component(j)).unwrap();
                assert!((got - target).abs() < 1e-7, "{id:?} init {j}: {got} vs {target}");
            }
        }
    }

    #[test]
    fn balanced_scenarios_have_equal_class_counts() {
        for id in [ScenarioId::B, ScenarioId::C, ScenarioId::D, ScenarioId::F] {
            let p = generate_problem(&spec(id), 1).unwrap();
            let m = id.n_components();
            let n = p.train.len();
            for j in 0..m {
                let c = p.train.truth.iter().filter(|&&t| t == j).count();
                assert_eq!(c, n / m, "{id:?} class {j}");
            }
            assert_eq!(p.test.len(), n);
        }
    }

    #[test]
    fn biased_scenario_counts_follow_pi1() {
        let mut s = spec(ScenarioId::Biased);
        s.pi1 = 0.2;
        let p = generate_problem(&s, 0).unwrap();
        let n1 = p.train.truth.iter().filter(|&&t| t == 0).count();
        assert_eq!(n1, (0.2 * p.train.len() as f64).round() as usize);
        assert_eq!(p.actual.weights()[0], 0.2);
        // initial weights stay uniform
        assert_eq!(p.init.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn scenario_a_mask_frees_means_only() {
        let p = generate_problem(&spec(ScenarioId::A), 0).unwrap();
        assert!(!p.mask.weights_free);
        assert_eq!(p.mask.component_free[0], vec![true, false]);
        // deviations are carried over into the initial guess
        assert_eq!(
            p.init.component(0).get_param(1),
            p.actual.component(0).get_param(1)
        );
    }

    #[test]
    fn covariances_are_positive_definite() {
        for idx in 0..4 {
            let p = generate_problem(&spec(ScenarioId::D), idx).unwrap();
            for c in p.actual.components().iter().chain(p.init.components()) {
                c.validate().unwrap();
            }
        }
    }
}
