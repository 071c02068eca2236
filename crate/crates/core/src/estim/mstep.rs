//! Closed-form weighted maximum-likelihood M-steps per family.

use super::{Algorithm, FitConfig};
use crate::error::{Error, Result};
use crate::mixture::{ComponentParams, LabeledDataset, MixtureSpec, Observation};
use crate::params::ParamMask;
use nalgebra::{DMatrix, DVector};

/// Maximizes the expected complete-data log-likelihood for fixed
/// responsibilities. Masked parameters are copied from `current`; mixing
/// weights are refreshed only when the estimator's objective contains them.
///
/// Variances are floored at the configured regularization and covariance
/// matrices get a matching ridge.
pub fn m_step(
    alg: &Algorithm,
    current: &MixtureSpec,
    data: &LabeledDataset,
    resp: &DMatrix<f64>,
    config: &FitConfig,
    iteration: usize,
) -> Result<MixtureSpec> {
    let k = current.n_components();
    let n = data.len();
    if resp.nrows() != n || resp.ncols() != k {
        return Err(Error::DimensionMismatch(format!(
            "responsibilities are {}x{}, expected {}x{}",
            resp.nrows(),
            resp.ncols(),
            n,
            k
        )));
    }
    let eps = config.m_step_regularization;
    let default_mask = ParamMask::all_free(current);
    let mask = config.mask.as_ref().unwrap_or(&default_mask);

    let col_sums: Vec<f64> = (0..k).map(|j| (0..n).map(|i| resp[(i, j)]).sum()).collect();
    for (j, &s) in col_sums.iter().enumerate() {
        if s < 10.0 * f64::EPSILON * n as f64 {
            return Err(Error::DegenerateComponent {
                component: j,
                iteration,
                weight: s,
            });
        }
    }

    let mut weights = current.weights().to_vec();
    if alg.estimates_weights() && mask.weights_free {
        for j in 0..k {
            weights[j] = col_sums[j] / n as f64;
        }
    }

    let mut components = Vec::with_capacity(k);
    for j in 0..k {
        let free = &mask.component_free[j];
        let old = current.component(j);
        let updated = match old {
            ComponentParams::UnivariateNormal { .. } => {
                let (mean, var) = weighted_scalar_moments(data, resp, j, col_sums[j]);
                let mut c = old.clone();
                if free[0] {
                    c.set_param(0, mean);
                }
                if free[1] {
                    // recenter on the mean actually kept
                    let center = c.get_param(0);
                    let v = if free[0] {
                        var
                    } else {
                        weighted_scalar_var_at(data, resp, j, col_sums[j], center)
                    };
                    c.set_param(1, v.max(eps).sqrt());
                }
                c
            }
            ComponentParams::MultivariateNormal { mu, .. } => {
                let d = mu.len();
                let (mean, cov) = weighted_vector_moments(data, resp, j, col_sums[j], d);
                let mut c = old.clone();
                for p in 0..d {
                    if free[p] {
                        c.set_param(p, mean[p]);
                    }
                }
                let ridge = DMatrix::identity(d, d) * eps;
                let cov = cov + ridge;
                let mut off = 0;
                for q in 0..d {
                    for p in q..d {
                        if free[d + off] {
                            c.set_param(d + off, cov[(p, q)]);
                        }
                        off += 1;
                    }
                }
                c
            }
            ComponentParams::MaxwellBoltzmann { .. } => {
                let mut num = 0.0;
                for (i, s) in data.samples.iter().enumerate() {
                    let x = s.as_scalar().ok_or_else(|| {
                        Error::Domain("Maxwell-Boltzmann needs scalar samples".to_string())
                    })?;
                    num += resp[(i, j)] * x * x;
                }
                let a2 = (num / (3.0 * col_sums[j])).max(eps);
                let mut c = old.clone();
                if free[0] {
                    c.set_param(0, a2.sqrt());
                }
                c
            }
            ComponentParams::LinearRegressor { .. } => {
                weighted_regression(old, data, resp, j, free, eps)?
            }
        };
        components.push(updated);
    }
    Ok(MixtureSpec::new_unchecked(weights, components))
}

fn weighted_scalar_moments(
    data: &LabeledDataset,
    resp: &DMatrix<f64>,
    j: usize,
    total: f64,
) -> (f64, f64) {
    let mut mean = 0.0;
    for (i, s) in data.samples.iter().enumerate() {
        mean += resp[(i, j)] * s.as_scalar().expect("scalar family");
    }
    mean /= total;
    (mean, weighted_scalar_var_at(data, resp, j, total, mean))
}

fn weighted_scalar_var_at(
    data: &LabeledDataset,
    resp: &DMatrix<f64>,
    j: usize,
    total: f64,
    center: f64,
) -> f64 {
    let mut var = 0.0;
    for (i, s) in data.samples.iter().enumerate() {
        let u = s.as_scalar().expect("scalar family") - center;
        var += resp[(i, j)] * u * u;
    }
    var / total
}

fn weighted_vector_moments(
    data: &LabeledDataset,
    resp: &DMatrix<f64>,
    j: usize,
    total: f64,
    d: usize,
) -> (DVector<f64>, DMatrix<f64>) {
    let mut mean = DVector::zeros(d);
    for (i, s) in data.samples.iter().enumerate() {
        mean += resp[(i, j)] * s.as_vector().expect("vector family");
    }
    mean /= total;
    let mut cov = DMatrix::zeros(d, d);
    for (i, s) in data.samples.iter().enumerate() {
        let u = s.as_vector().expect("vector family") - &mean;
        cov.syger(resp[(i, j)], &u, &u, 1.0);
    }
    cov /= total;
    // syger fills the lower triangle; mirror it
    for p in 0..d {
        for q in p + 1..d {
            cov[(p, q)] = cov[(q, p)];
        }
    }
    (mean, cov)
}

fn weighted_regression(
    old: &ComponentParams,
    data: &LabeledDataset,
    resp: &DMatrix<f64>,
    j: usize,
    free: &[bool],
    eps: f64,
) -> Result<ComponentParams> {
    let (mut sw, mut swx, mut swxx, mut swy, mut swxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, s) in data.samples.iter().enumerate() {
        let (x, y) = match s {
            Observation::Pair { x, y } => (*x, *y),
            _ => return Err(Error::Domain("regressors need (x, y) samples".to_string())),
        };
        let w = resp[(i, j)];
        sw += w;
        swx += w * x;
        swxx += w * x * x;
        swy += w * y;
        swxy += w * x * y;
    }
    let mut c = old.clone();
    // normal equations of the weighted least squares
    let det = sw * swxx - swx * swx;
    if free[0] || free[1] {
        if det.abs() < 1e-14 * (1.0 + sw * swxx) {
            return Err(Error::Domain(
                "degenerate covariate design for weighted least squares".to_string(),
            ));
        }
        let b1 = (sw * swxy - swx * swy) / det;
        let b0 = (swy - b1 * swx) / sw;
        if free[0] {
            c.set_param(0, b0);
        }
        if free[1] {
            c.set_param(1, b1);
        }
    }
    if free[2] {
        let (b0, b1) = (c.get_param(0), c.get_param(1));
        let mut rss = 0.0;
        for (i, s) in data.samples.iter().enumerate() {
            let (x, y) = s.as_pair().unwrap();
            let r = y - b0 - b1 * x;
            rss += resp[(i, j)] * r * r;
        }
        c.set_param(2, (rss / sw).max(eps).sqrt());
    }
    Ok(c)
}
