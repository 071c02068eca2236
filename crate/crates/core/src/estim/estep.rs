//! E-steps, incomplete-data log-likelihoods and the EM lower-bound pieces.
//!
//! All density products are formed in log space and normalized with a
//! log-sum-exp shift; responsibilities are exact distributions afterwards.

use super::Algorithm;
use crate::error::{Error, Result};
use crate::labels::ProbLabel;
use crate::mixture::{LabeledDataset, MixtureSpec, PreparedComponent};
use nalgebra::DMatrix;

/// Per-sample, per-component log weights `log w_ij` in front of the density
/// term: `pi_j` for US/S/DCA, `p_ij` for CA, `p_ij pi_j` for WCA.
fn log_weight(alg: &Algorithm, weights: &[f64], i: usize, j: usize) -> f64 {
    match alg {
        Algorithm::Unsupervised | Algorithm::Supervised | Algorithm::DirectContextAware(_) => {
            weights[j].ln()
        }
        Algorithm::ContextAware(p) => p[i].probs()[j].ln(),
        Algorithm::WeightedContextAware(p) => p[i].probs()[j].ln() + weights[j].ln(),
    }
}

fn check_labels(alg: &Algorithm, data: &LabeledDataset, m: usize) -> Result<()> {
    if let Some(p) = alg.plabels() {
        if p.len() != data.len() {
            return Err(Error::LengthMismatch {
                what: "plabels",
                got: p.len(),
                expected: data.len(),
            });
        }
        if p.iter().any(|l| l.len() != m) {
            return Err(Error::MissingLabels(
                "context-aware estimation",
                "labels over all mixture components",
            ));
        }
    }
    if matches!(alg, Algorithm::Supervised) && data.truth.len() != data.len() {
        return Err(Error::MissingLabels("S", "ground-truth labels"));
    }
    Ok(())
}

pub(crate) fn prepare(m: &MixtureSpec) -> Result<Vec<PreparedComponent>> {
    m.components().iter().map(PreparedComponent::new).collect()
}

/// Log densities for every (sample, component) pair.
pub(crate) fn log_density_table(
    prepared: &[PreparedComponent],
    data: &LabeledDataset,
) -> Result<DMatrix<f64>> {
    let n = data.len();
    let m = prepared.len();
    let mut table = DMatrix::zeros(n, m);
    for (i, x) in data.samples.iter().enumerate() {
        for (j, comp) in prepared.iter().enumerate() {
            table[(i, j)] = comp.log_density(x)?;
        }
    }
    Ok(table)
}

/// Posterior responsibilities `E[z_ij]` under the chosen estimator.
///
/// US: rows proportional to `pi_j f_j`; CA: `p_ij f_j`; WCA: `p_ij pi_j f_j`;
/// S: one-hot at the truth; DCA: the labels verbatim.
pub fn e_step(alg: &Algorithm, m: &MixtureSpec, data: &LabeledDataset) -> Result<DMatrix<f64>> {
    let n = data.len();
    let k = m.n_components();
    check_labels(alg, data, k)?;

    match alg {
        Algorithm::Supervised => {
            let mut r = DMatrix::zeros(n, k);
            for (i, &t) in data.truth.iter().enumerate() {
                if t >= k {
                    return Err(Error::IndexOutOfRange { index: t, len: k });
                }
                r[(i, t)] = 1.0;
            }
            Ok(r)
        }
        Algorithm::DirectContextAware(p) => {
            let mut r = DMatrix::zeros(n, k);
            for (i, label) in p.iter().enumerate() {
                for (j, &v) in label.probs().iter().enumerate() {
                    r[(i, j)] = v;
                }
            }
            Ok(r)
        }
        _ => {
            let prepared = prepare(m)?;
            let table = log_density_table(&prepared, data)?;
            let mut r = DMatrix::zeros(n, k);
            for i in 0..n {
                let mut row = vec![0.0; k];
                let mut max = f64::NEG_INFINITY;
                for j in 0..k {
                    let l = log_weight(alg, m.weights(), i, j) + table[(i, j)];
                    row[j] = l;
                    if l > max {
                        max = l;
                    }
                }
                if max == f64::NEG_INFINITY {
                    return Err(Error::AllZeroRow { row: i });
                }
                let mut sum = 0.0;
                for v in row.iter_mut() {
                    *v = (*v - max).exp();
                    sum += *v;
                }
                for (j, v) in row.iter().enumerate() {
                    r[(i, j)] = v / sum;
                }
            }
            Ok(r)
        }
    }
}

/// Incomplete-data log-likelihood of the estimator's own objective.
///
/// US/S/DCA: `sum_i log sum_j pi_j f_j`; CA: `sum_i log sum_j p_ij f_j`;
/// WCA: `sum_i log sum_j p_ij pi_j f_j`.
pub fn incomplete_loglik(alg: &Algorithm, m: &MixtureSpec, data: &LabeledDataset) -> Result<f64> {
    check_labels(alg, data, m.n_components())?;
    let prepared = prepare(m)?;
    let table = log_density_table(&prepared, data)?;
    let k = m.n_components();
    let mut total = 0.0;
    for i in 0..data.len() {
        let mut max = f64::NEG_INFINITY;
        let mut terms = vec![0.0; k];
        for j in 0..k {
            let l = log_weight(alg, m.weights(), i, j) + table[(i, j)];
            terms[j] = l;
            if l > max {
                max = l;
            }
        }
        if max == f64::NEG_INFINITY {
            return Err(Error::AllZeroRow { row: i });
        }
        let sum: f64 = terms.iter().map(|&l| (l - max).exp()).sum();
        total += max + sum.ln();
    }
    Ok(total)
}

/// Expected complete-data log-likelihood `Q(theta_eval, theta_at)` and the
/// latent-data entropy `H` at `theta_at`, under the estimator's E-step.
///
/// For the EM estimators (US, CA, WCA) `q + h` is tangent to the incomplete
/// log-likelihood at `m_eval = m_at` and bounds it from below elsewhere.
pub fn q_and_entropy(
    alg: &Algorithm,
    m_at: &MixtureSpec,
    m_eval: &MixtureSpec,
    data: &LabeledDataset,
) -> Result<(f64, f64)> {
    let resp = e_step(alg, m_at, data)?;
    let prepared = prepare(m_eval)?;
    let table = log_density_table(&prepared, data)?;
    let k = m_eval.n_components();
    let mut q = 0.0;
    let mut h = 0.0;
    for i in 0..data.len() {
        for j in 0..k {
            let z = resp[(i, j)];
            if z > 0.0 {
                q += z * (log_weight(alg, m_eval.weights(), i, j) + table[(i, j)]);
                h -= z * z.ln();
            }
        }
    }
    Ok((q, h))
}

/// Maximum-a-posteriori class decisions `argmax_j pi_j f_j(x)`, ties to the
/// lowest index.
pub fn classify_map(m: &MixtureSpec, data: &LabeledDataset) -> Result<Vec<usize>> {
    let prepared = prepare(m)?;
    let table = log_density_table(&prepared, data)?;
    let k = m.n_components();
    let mut out = Vec::with_capacity(data.len());
    for i in 0..data.len() {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for j in 0..k {
            let v = m.weights()[j].ln() + table[(i, j)];
            if v > best_val {
                best_val = v;
                best = j;
            }
        }
        out.push(best);
    }
    Ok(out)
}

/// Side estimator for the CA mixing weights: the fraction of labels whose
/// argmax lands on each class. Argmax ties break to the lowest index.
pub fn ca_mixing_estimator(plabels: &[ProbLabel]) -> Vec<f64> {
    assert!(!plabels.is_empty(), "need at least one label");
    let m = plabels[0].len();
    let mut counts = vec![0usize; m];
    for l in plabels {
        counts[l.argmax()] += 1;
    }
    counts
        .iter()
        .map(|&c| c as f64 / plabels.len() as f64)
        .collect()
}
