//! Standard-error and convergence-rate study on a fixed two-Gaussian problem
//! with known deviations: repeated sampling, per-negentropy fits, and the
//! information matrices evaluated at each fitted point.

use crate::error::Result;
use crate::estim::{fit, Algorithm, AlgorithmTag, FitConfig};
use crate::info::{active_layout, complete_info, info_at, mip_assemble};
use crate::labels::{make_context_labels, ContextMode};
use crate::mixture::{sample_mixture, ComponentParams, MixtureSpec};
use crate::params::ParamMask;
use crate::rng::{derive_rng, f64_coord};
use nalgebra::DMatrix;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct MipConfig {
    pub reps: usize,
    pub n: usize,
    pub ne_grid: Vec<f64>,
    pub seed: u64,
}

impl Default for MipConfig {
    fn default() -> Self {
        Self {
            reps: 100,
            n: 10_000,
            ne_grid: super::default_ne_grid(),
            seed: 42,
        }
    }
}

/// One repetition of one estimator at one negentropy level.
#[derive(Debug, Clone)]
pub struct MipRow {
    pub rep: usize,
    pub algorithm: AlgorithmTag,
    pub ne: Option<f64>,
    pub se_pi1: Option<f64>,
    pub se_mu1: Option<f64>,
    pub se_mu2: Option<f64>,
    pub r_prime: Option<f64>,
    pub regular: bool,
}

/// Aggregated over regular repetitions.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MipAggregate {
    pub algorithm: AlgorithmTag,
    pub ne: Option<f64>,
    pub se_pi1: Option<f64>,
    pub se_mu1: Option<f64>,
    pub se_mu2: Option<f64>,
    /// Sum of the available per-parameter standard errors.
    pub se_sum: Option<f64>,
    pub r_prime: Option<f64>,
    pub reps_used: usize,
    pub reps_excluded: usize,
}

fn actual_spec() -> MixtureSpec {
    MixtureSpec::new(
        vec![0.6, 0.4],
        vec![
            ComponentParams::UnivariateNormal { mu: 0.0, sigma: 1.0 },
            ComponentParams::UnivariateNormal { mu: 1.0, sigma: 2.0 },
        ],
    )
    .unwrap()
}

fn init_spec() -> MixtureSpec {
    MixtureSpec::new(
        vec![0.5, 0.5],
        vec![
            ComponentParams::UnivariateNormal { mu: 0.49, sigma: 1.0 },
            ComponentParams::UnivariateNormal { mu: 0.51, sigma: 2.0 },
        ],
    )
    .unwrap()
}

/// Per-repetition rows for every estimator and level. The weight and the two
/// means are estimated; the deviations stay fixed.
pub fn mip_experiment_rows(cfg: &MipConfig) -> Result<Vec<MipRow>> {
    let actual = actual_spec();
    let init = init_spec();
    let mask = ParamMask {
        weights_free: true,
        component_free: vec![vec![true, false], vec![true, false]],
    };
    let fit_cfg = FitConfig::default().with_mask(mask);

    let rows: Vec<Vec<MipRow>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| -> Result<Vec<MipRow>> {
            let mut rng = derive_rng(cfg.seed, &[0x317, rep as u64]);
            let data = sample_mixture(&actual, cfg.n, &mut rng)?;
            let mut out = Vec::new();

            let us_fit = fit(&Algorithm::Unsupervised, &data, &init, &fit_cfg)?;
            let us_info = info_at(
                &Algorithm::Unsupervised,
                &us_fit.spec,
                &data,
                &us_fit.responsibilities,
                fit_cfg.mask.as_ref(),
            )?;
            let us_row = |ne: Option<f64>| MipRow {
                rep,
                algorithm: AlgorithmTag::US,
                ne,
                se_pi1: us_info.regular.then(|| us_info.se[0]),
                se_mu1: us_info.regular.then(|| us_info.se[1]),
                se_mu2: us_info.regular.then(|| us_info.se[2]),
                r_prime: us_info.regular.then_some(us_info.r_prime),
                regular: us_info.regular,
            };

            // supervised reference: complete-data information only
            let s_fit = fit(&Algorithm::Supervised, &data, &init, &fit_cfg)?;
            let s_layout = active_layout(&Algorithm::Supervised, &s_fit.spec, fit_cfg.mask.as_ref());
            let s_ic = complete_info(&s_fit.spec, &data, &s_fit.responsibilities, &s_layout)?;
            let w = s_layout.len();
            let s_info = mip_assemble(s_ic, DMatrix::zeros(w, w), s_layout.names(&s_fit.spec), false)?;
            out.push(MipRow {
                rep,
                algorithm: AlgorithmTag::S,
                ne: None,
                se_pi1: s_info.regular.then(|| s_info.se[0]),
                se_mu1: s_info.regular.then(|| s_info.se[1]),
                se_mu2: s_info.regular.then(|| s_info.se[2]),
                r_prime: Some(1.0),
                regular: s_info.regular,
            });

            for &ne in &cfg.ne_grid {
                out.push(us_row(Some(ne)));
                let mut label_rng =
                    derive_rng(cfg.seed, &[0x318, rep as u64, f64_coord(ne)]);
                let labels =
                    make_context_labels(&data.truth, 2, ContextMode::Correct, ne, &mut label_rng)?;
                for (tag, alg) in [
                    (AlgorithmTag::CA, Algorithm::ContextAware(labels.clone())),
                    (
                        AlgorithmTag::WCA,
                        Algorithm::WeightedContextAware(labels.clone()),
                    ),
                ] {
                    let r = fit(&alg, &data, &init, &fit_cfg)?;
                    let info = info_at(&alg, &r.spec, &data, &r.responsibilities, fit_cfg.mask.as_ref())?;
                    let (se_pi1, se_mu1, se_mu2) = if info.regular {
                        if tag == AlgorithmTag::CA {
                            // reduced problem: no weight coordinate
                            (None, Some(info.se[0]), Some(info.se[1]))
                        } else {
                            (Some(info.se[0]), Some(info.se[1]), Some(info.se[2]))
                        }
                    } else {
                        (None, None, None)
                    };
                    out.push(MipRow {
                        rep,
                        algorithm: tag,
                        ne: Some(ne),
                        se_pi1,
                        se_mu1,
                        se_mu2,
                        r_prime: info.regular.then_some(info.r_prime),
                        regular: info.regular,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Runs the experiment and averages per (algorithm, ne) over the regular
/// repetitions.
pub fn mip_experiment(cfg: &MipConfig) -> Result<Vec<MipAggregate>> {
    let rows = mip_experiment_rows(cfg)?;
    let mut cells: Vec<(AlgorithmTag, Option<u64>)> = Vec::new();
    cells.push((AlgorithmTag::S, None));
    for tag in [AlgorithmTag::US, AlgorithmTag::CA, AlgorithmTag::WCA] {
        for &ne in &cfg.ne_grid {
            cells.push((tag, Some(f64_coord(ne))));
        }
    }
    let mut out = Vec::new();
    for (tag, ne_bits) in cells {
        let cell_rows: Vec<&MipRow> = rows
            .iter()
            .filter(|r| r.algorithm == tag && r.ne.map(f64_coord) == ne_bits)
            .collect();
        if cell_rows.is_empty() {
            continue;
        }
        let used: Vec<&&MipRow> = cell_rows.iter().filter(|r| r.regular).collect();
        let mean = |f: &dyn Fn(&MipRow) -> Option<f64>| -> Option<f64> {
            let v: Vec<f64> = used.iter().filter_map(|r| f(r)).collect();
            if v.is_empty() {
                None
            } else {
                Some(v.iter().sum::<f64>() / v.len() as f64)
            }
        };
        let se_pi1 = mean(&|r| r.se_pi1);
        let se_mu1 = mean(&|r| r.se_mu1);
        let se_mu2 = mean(&|r| r.se_mu2);
        let se_sum = match (se_pi1, se_mu1, se_mu2) {
            (None, None, None) => None,
            _ => Some(se_pi1.unwrap_or(0.0) + se_mu1.unwrap_or(0.0) + se_mu2.unwrap_or(0.0)),
        };
        out.push(MipAggregate {
            algorithm: tag,
            ne: ne_bits.map(f64::from_bits),
            se_pi1,
            se_mu1,
            se_mu2,
            se_sum,
            r_prime: mean(&|r| r.r_prime),
            reps_used: used.len(),
            reps_excluded: cell_rows.len() - used.len(),
        });
    }
    Ok(out)
}
