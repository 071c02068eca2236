//! Observed-information analysis: complete-data information, missing
//! information, their difference, the EM rate matrix and standard errors.
//!
//! The missing information matrix is the conditional covariance of the
//! complete-data score under the estimator's responsibilities; its closed
//! forms per coordinate pair are assembled here and checked elsewhere against
//! a brute-force covariance oracle and the finite-difference Hessian of the
//! incomplete log-likelihood.

use crate::error::{Error, Result};
use crate::estim::{incomplete_loglik, Algorithm};
use crate::linalg::{pencil_spectral_radius, robust_inverse, spectral_radius};
use crate::mixture::{component_log_density_hessian, component_score, LabeledDataset, MixtureSpec};
use crate::params::{ParamId, ParamLayout, ParamMask};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// The assembled decomposition at one evaluation point.
#[derive(Debug, Clone)]
pub struct InfoMatrices {
    pub i_c: DMatrix<f64>,
    pub i_m: DMatrix<f64>,
    /// `i_c - i_m`.
    pub i_obs: DMatrix<f64>,
    /// Rate matrix `i_c^{-1} i_m`; zero when `i_m` vanishes.
    pub rate: DMatrix<f64>,
    /// Largest eigenvalue magnitude of the rate matrix.
    pub spectral_radius: f64,
    /// `1 - spectral_radius`; the theoretical convergence rate.
    pub r_prime: f64,
    /// Standard errors: square roots of the diagonal of `i_obs^{-1}`.
    pub se: DVector<f64>,
    /// Coordinate names matching the rows/columns.
    pub param_index: Vec<String>,
    /// True when the weight coordinates are absent (CA's reduced problem).
    pub reduced: bool,
    /// False when `i_c` or `i_obs` is singular; the spectral radius and the
    /// standard errors are NaN sentinels in that case.
    pub regular: bool,
}

impl InfoMatrices {
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Doc<'a> {
            i_c: Vec<Vec<f64>>,
            i_m: Vec<Vec<f64>>,
            i_obs: Vec<Vec<f64>>,
            rate: Vec<Vec<f64>>,
            spectral_radius: f64,
            r_prime: f64,
            se: Vec<f64>,
            param_index: &'a [String],
            reduced: bool,
            regular: bool,
        }
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
                .collect()
        };
        serde_json::to_value(Doc {
            i_c: rows(&self.i_c),
            i_m: rows(&self.i_m),
            i_obs: rows(&self.i_obs),
            rate: rows(&self.rate),
            spectral_radius: self.spectral_radius,
            r_prime: self.r_prime,
            se: self.se.iter().copied().collect(),
            param_index: &self.param_index,
            reduced: self.reduced,
            regular: self.regular,
        })
        .expect("serializable")
    }
}

/// Active coordinates for an estimator at a given mask: CA drops the weight
/// rows and columns, everything else keeps them when the mask frees them.
pub fn active_layout(alg: &Algorithm, spec: &MixtureSpec, mask: Option<&ParamMask>) -> ParamLayout {
    let default_mask = ParamMask::all_free(spec);
    let mask = mask.unwrap_or(&default_mask);
    ParamLayout::masked(spec, mask, alg.estimates_weights())
}

/// Expected complete-data information at the evaluation point.
///
/// Weight block: `N/pi_j` on the diagonal plus `N/pi_M` everywhere; weight
/// versus component-parameter blocks vanish, as do blocks across components;
/// within a component the block is `-sum_i z_ik d2 log f_k`.
pub fn complete_info(
    spec: &MixtureSpec,
    data: &LabeledDataset,
    resp: &DMatrix<f64>,
    layout: &ParamLayout,
) -> Result<DMatrix<f64>> {
    let n = data.len();
    let m = spec.n_components();
    if resp.nrows() != n || resp.ncols() != m {
        return Err(Error::DimensionMismatch(
            "responsibilities do not match the dataset".to_string(),
        ));
    }
    let w = layout.len();
    let mut out = DMatrix::zeros(w, w);

    // accumulated per-component weighted Hessians
    let mut comp_blocks: Vec<DMatrix<f64>> = Vec::with_capacity(m);
    for k in 0..m {
        let p = spec.component(k).param_count();
        let mut acc = DMatrix::zeros(p, p);
        for (i, x) in data.samples.iter().enumerate() {
            let z = resp[(i, k)];
            if z != 0.0 {
                acc += component_log_density_hessian(spec.component(k), x)? * z;
            }
        }
        comp_blocks.push(-acc);
    }

    let pi = spec.weights();
    let pi_last = pi[m - 1];
    for (a, ea) in layout.entries.iter().enumerate() {
        for (b, eb) in layout.entries.iter().enumerate() {
            out[(a, b)] = match (*ea, *eb) {
                (ParamId::Weight(j), ParamId::Weight(q)) => {
                    let base = n as f64 / pi_last;
                    if j == q {
                        n as f64 / pi[j] + base
                    } else {
                        base
                    }
                }
                (ParamId::Weight(_), ParamId::Component { .. })
                | (ParamId::Component { .. }, ParamId::Weight(_)) => 0.0,
                (
                    ParamId::Component { comp: c1, idx: p1 },
                    ParamId::Component { comp: c2, idx: p2 },
                ) => {
                    if c1 == c2 {
                        comp_blocks[c1][(p1, p2)]
                    } else {
                        0.0
                    }
                }
            };
        }
    }
    Ok(out)
}

/// Missing information: the covariance of the complete-data score under the
/// estimator's responsibilities, assembled from its closed-form element
/// families.
pub fn missing_info(
    spec: &MixtureSpec,
    data: &LabeledDataset,
    resp: &DMatrix<f64>,
    layout: &ParamLayout,
) -> Result<DMatrix<f64>> {
    let n = data.len();
    let m = spec.n_components();
    if resp.nrows() != n || resp.ncols() != m {
        return Err(Error::DimensionMismatch(
            "responsibilities do not match the dataset".to_string(),
        ));
    }

    // per-component score tables b_[k][i] only for components the layout touches
    let mut scores: Vec<Option<Vec<DVector<f64>>>> = vec![None; m];
    for e in &layout.entries {
        if let ParamId::Component { comp, .. } = e {
            if scores[*comp].is_none() {
                let mut per_sample = Vec::with_capacity(n);
                for x in &data.samples {
                    per_sample.push(component_score(spec.component(*comp), x)?);
                }
                scores[*comp] = Some(per_sample);
            }
        }
    }
    let b = |k: usize, p: usize, i: usize| scores[k].as_ref().unwrap()[i][p];

    let pi = spec.weights();
    let last = m - 1;
    let w = layout.len();
    let mut out = DMatrix::zeros(w, w);

    for (a, ea) in layout.entries.iter().enumerate() {
        for (bb, eb) in layout.entries.iter().enumerate().skip(a) {
            let mut acc = 0.0;
            match (*ea, *eb) {
                (ParamId::Weight(j), ParamId::Weight(q)) => {
                    if j == q {
                        for i in 0..n {
                            let zj = resp[(i, j)];
                            let zl = resp[(i, last)];
                            acc += zj * (1.0 - zj) / (pi[j] * pi[j])
                                + 2.0 * zj * zl / (pi[j] * pi[last])
                                + zl * (1.0 - zl) / (pi[last] * pi[last]);
                        }
                    } else {
                        for i in 0..n {
                            let zj = resp[(i, j)];
                            let zq = resp[(i, q)];
                            let zl = resp[(i, last)];
                            acc += -zj * zq / (pi[j] * pi[q])
                                + zj * zl / (pi[j] * pi[last])
                                + zq * zl / (pi[q] * pi[last])
                                + zl * (1.0 - zl) / (pi[last] * pi[last]);
                        }
                    }
                }
                (ParamId::Weight(j), ParamId::Component { comp: k, idx: p })
                | (ParamId::Component { comp: k, idx: p }, ParamId::Weight(j)) => {
                    if k == j {
                        for i in 0..n {
                            let zj = resp[(i, j)];
                            let zl = resp[(i, last)];
                            acc += b(k, p, i) * (zj * (1.0 - zj) / pi[j] + zj * zl / pi[last]);
                        }
                    } else if k == last {
                        for i in 0..n {
                            let zj = resp[(i, j)];
                            let zl = resp[(i, last)];
                            acc += b(k, p, i) * (-zj * zl / pi[j] - zl * (1.0 - zl) / pi[last]);
                        }
                    } else {
                        for i in 0..n {
                            let zj = resp[(i, j)];
                            let zk = resp[(i, k)];
                            let zl = resp[(i, last)];
                            acc += b(k, p, i) * (-zj * zk / pi[j] + zl * zk / pi[last]);
                        }
                    }
                }
                (
                    ParamId::Component { comp: j, idx: p },
                    ParamId::Component { comp: k, idx: q },
                ) => {
                    if j == k {
                        for i in 0..n {
                            let z = resp[(i, j)];
                            acc += b(j, p, i) * b(j, q, i) * z * (1.0 - z);
                        }
                    } else {
                        for i in 0..n {
                            acc -= b(j, p, i) * b(k, q, i) * resp[(i, j)] * resp[(i, k)];
                        }
                    }
                }
            }
            out[(a, bb)] = acc;
            out[(bb, a)] = acc;
        }
    }
    Ok(out)
}

/// Assembles the decomposition: observed information, rate matrix, spectral
/// radius, theoretical convergence rate and standard errors.
///
/// Singular `i_c` or `i_obs` flags the problem non-regular; the affected
/// fields become NaN sentinels and the caller decides what to do.
pub fn mip_assemble(
    i_c: DMatrix<f64>,
    i_m: DMatrix<f64>,
    param_index: Vec<String>,
    reduced: bool,
) -> Result<InfoMatrices> {
    if i_c.nrows() != i_m.nrows() || i_c.ncols() != i_m.ncols() || i_c.nrows() != i_c.ncols() {
        return Err(Error::DimensionMismatch(
            "information matrices must be square and conformable".to_string(),
        ));
    }
    let w = i_c.nrows();
    let i_obs = &i_c - &i_m;

    let (rate, radius, regular_c) = match robust_inverse(&i_c) {
        Some(inv_c) => {
            let rate = inv_c * &i_m;
            // prefer the symmetric-similarity route; it is exact for SPD i_c
            // and avoids the general Schur iteration on degenerate inputs
            let radius = pencil_spectral_radius(&i_c, &i_m)
                .unwrap_or_else(|| spectral_radius(&rate));
            (rate, radius, true)
        }
        None => (DMatrix::from_element(w, w, f64::NAN), f64::NAN, false),
    };

    let (se, regular_obs) = match robust_inverse(&i_obs) {
        Some(inv_obs) => {
            let diag = inv_obs.diagonal();
            if diag.iter().any(|&v| v < 0.0) {
                (DVector::from_element(w, f64::NAN), false)
            } else {
                (diag.map(f64::sqrt), true)
            }
        }
        None => (DVector::from_element(w, f64::NAN), false),
    };

    Ok(InfoMatrices {
        i_c,
        i_m,
        i_obs,
        rate,
        spectral_radius: radius,
        r_prime: 1.0 - radius,
        se,
        param_index,
        reduced,
        regular: regular_c && regular_obs,
    })
}

/// Convenience wrapper: both matrices plus the assembly for an estimator at
/// an evaluation point.
pub fn info_at(
    alg: &Algorithm,
    spec: &MixtureSpec,
    data: &LabeledDataset,
    resp: &DMatrix<f64>,
    mask: Option<&ParamMask>,
) -> Result<InfoMatrices> {
    let layout = active_layout(alg, spec, mask);
    let i_c = complete_info(spec, data, resp, &layout)?;
    let i_m = missing_info(spec, data, resp, &layout)?;
    mip_assemble(
        i_c,
        i_m,
        layout.names(spec),
        !alg.estimates_weights(),
    )
}

/// Negative Hessian of the estimator's incomplete log-likelihood by central
/// differences over the active coordinates; the independent oracle for the
/// assembled `i_obs`.
pub fn finite_difference_observed_info(
    alg: &Algorithm,
    spec: &MixtureSpec,
    data: &LabeledDataset,
    mask: Option<&ParamMask>,
) -> Result<DMatrix<f64>> {
    let layout = active_layout(alg, spec, mask);
    let base = layout.pack(spec);
    let w = layout.len();
    let f = |v: &DVector<f64>| -> Result<f64> {
        let m = layout.unpack(spec, v);
        incomplete_loglik(alg, &m, data)
    };
    let f0 = f(&base)?;
    let step = |i: usize| 1e-4 * (1.0 + base[i].abs());
    let mut hess = DMatrix::zeros(w, w);
    for i in 0..w {
        let hi = step(i);
        let mut up = base.clone();
        up[i] += hi;
        let mut dn = base.clone();
        dn[i] -= hi;
        hess[(i, i)] = (f(&up)? - 2.0 * f0 + f(&dn)?) / (hi * hi);
        for j in (i + 1)..w {
            let hj = step(j);
            let mut pp = base.clone();
            pp[i] += hi;
            pp[j] += hj;
            let mut pm = base.clone();
            pm[i] += hi;
            pm[j] -= hj;
            let mut mp = base.clone();
            mp[i] -= hi;
            mp[j] += hj;
            let mut mm = base.clone();
            mm[i] -= hi;
            mm[j] -= hj;
            let v = (f(&pp)? - f(&pm)? - f(&mp)? + f(&mm)?) / (4.0 * hi * hj);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(-hess)
}
