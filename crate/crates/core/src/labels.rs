//! Probabilistic labels carrying contextual information, their scaled
//! negentropy, and derivations from discrete context models.

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A per-sample probability distribution over the mixture components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbLabel {
    probs: Vec<f64>,
}

impl ProbLabel {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidParameter {
                name: "probs",
                reason: "entries must lie in [0, 1]".to_string(),
            });
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter {
                name: "probs",
                reason: format!("must sum to 1, got {sum}"),
            });
        }
        Ok(Self { probs })
    }

    pub fn uniform(m: usize) -> Self {
        Self {
            probs: vec![1.0 / m as f64; m],
        }
    }

    pub fn one_hot(m: usize, class: usize) -> Self {
        let mut probs = vec![0.0; m];
        probs[class] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Index of the largest entry; ties break to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }
}

/// Scaled negentropy `1 + sum_j p_j log_M p_j`, in `[0, 1]`.
///
/// 0 for the uniform ("ignorant") label, 1 for a one-hot ("perfect") label.
pub fn negentropy(label: &ProbLabel) -> f64 {
    let m = label.len() as f64;
    let log_m = m.ln();
    let mut acc = 0.0;
    for &p in label.probs() {
        if p > 0.0 {
            acc += p * p.ln() / log_m;
        }
    }
    1.0 + acc
}

/// Builds a label with exactly the requested negentropy and the given top
/// class, from the peaked-uniform family: mass `q` on the top class and
/// `(1 - q) / (M - 1)` elsewhere, with `q >= 1/M` solved by bisection.
pub fn make_label(ne: f64, m: usize, top_class: usize) -> Result<ProbLabel> {
    if !(0.0..1.0).contains(&ne) {
        return Err(Error::InvalidParameter {
            name: "ne",
            reason: format!("must lie in [0, 1), got {ne}"),
        });
    }
    if top_class >= m || m < 2 {
        return Err(Error::IndexOutOfRange {
            index: top_class,
            len: m,
        });
    }
    let peaked = |q: f64| {
        let mut probs = vec![(1.0 - q) / (m as f64 - 1.0); m];
        probs[top_class] = q;
        ProbLabel { probs }
    };
    if ne == 0.0 {
        // the curve is flat at its minimum; the branch point is the solution
        return Ok(ProbLabel::uniform(m));
    }
    let mut lo = 1.0 / m as f64;
    let mut hi = 1.0;
    for _ in 0..200 {
        let q = 0.5 * (lo + hi);
        let v = negentropy(&peaked(q));
        if (v - ne).abs() < 1e-12 {
            return Ok(peaked(q));
        }
        if v < ne {
            lo = q;
        } else {
            hi = q;
        }
    }
    Ok(peaked(0.5 * (lo + hi)))
}

/// How probabilistic labels relate to the ground truth when generated for a
/// dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContextMode {
    /// Every label's top class is the true class, at a fixed negentropy.
    Correct,
    /// A round(frac * N)-subset of samples gets a top class drawn uniformly
    /// from the non-truth classes; the rest stay correct.
    Wrong { frac: f64 },
    /// Per-sample negentropy drawn uniformly from `[ne_low, ne_high]`, top
    /// class always the truth.
    Mixed { ne_low: f64, ne_high: f64 },
}

/// Generates one probabilistic label per sample according to the mode.
///
/// `ne` is the shared information content for `Correct` and `Wrong`; it is
/// ignored for `Mixed`.
pub fn make_context_labels(
    truth: &[usize],
    m: usize,
    mode: ContextMode,
    ne: f64,
    rng: &mut impl Rng,
) -> Result<Vec<ProbLabel>> {
    match mode {
        ContextMode::Correct => truth.iter().map(|&t| make_label(ne, m, t)).collect(),
        ContextMode::Wrong { frac } => {
            if !(0.0..=1.0).contains(&frac) {
                return Err(Error::InvalidParameter {
                    name: "frac",
                    reason: format!("must lie in [0, 1], got {frac}"),
                });
            }
            let n = truth.len();
            let k = (frac * n as f64).round() as usize;
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(rng);
            let mut flip = vec![false; n];
            for &i in idx.iter().take(k) {
                flip[i] = true;
            }
            truth
                .iter()
                .zip(&flip)
                .map(|(&t, &f)| {
                    let top = if f {
                        let mut pick = rng.gen_range(0..m - 1);
                        if pick >= t {
                            pick += 1;
                        }
                        pick
                    } else {
                        t
                    };
                    make_label(ne, m, top)
                })
                .collect()
        }
        ContextMode::Mixed { ne_low, ne_high } => {
            if ne_low > ne_high {
                return Err(Error::InvalidParameter {
                    name: "ne_low",
                    reason: "must not exceed ne_high".to_string(),
                });
            }
            truth
                .iter()
                .map(|&t| {
                    let ne_i = rng.gen_range(ne_low..=ne_high);
                    make_label(ne_i.min(1.0 - 1e-12), m, t)
                })
                .collect()
        }
    }
}

/// Discrete context distributions from which labels are derived.
#[derive(Debug, Clone)]
pub struct ContextModel {
    /// p(c), length L.
    pub prior: Vec<f64>,
    /// p(z | c): L rows of length M.
    pub cond_z_given_c: Option<Vec<Vec<f64>>>,
    /// p(c | z): M rows of length L.
    pub cond_c_given_z: Option<Vec<Vec<f64>>>,
    /// Whether the context value is observed per sample.
    pub observed: bool,
}

impl ContextModel {
    pub fn validate(&self) -> Result<()> {
        check_distribution(&self.prior, "prior")?;
        if let Some(rows) = &self.cond_z_given_c {
            if rows.len() != self.prior.len() {
                return Err(Error::DimensionMismatch(
                    "cond_z_given_c must have one row per context value".to_string(),
                ));
            }
            for row in rows {
                check_distribution(row, "cond_z_given_c row")?;
            }
        }
        if let Some(rows) = &self.cond_c_given_z {
            for row in rows {
                if row.len() != self.prior.len() {
                    return Err(Error::DimensionMismatch(
                        "cond_c_given_z rows must have one entry per context value".to_string(),
                    ));
                }
                check_distribution(row, "cond_c_given_z row")?;
            }
        }
        Ok(())
    }
}

fn check_distribution(p: &[f64], what: &'static str) -> Result<()> {
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || p.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidParameter {
            name: what,
            reason: format!("not a distribution (sum {sum})"),
        });
    }
    Ok(())
}

/// Label for latent context: `p_i = sum_c p(c) p(z | c)`.
pub fn derive_label_ca_latent(ctx: &ContextModel) -> Result<ProbLabel> {
    ctx.validate()?;
    let rows = ctx
        .cond_z_given_c
        .as_ref()
        .ok_or(Error::MissingDistribution("cond_z_given_c"))?;
    let m = rows[0].len();
    let mut probs = vec![0.0; m];
    for (pc, row) in ctx.prior.iter().zip(rows) {
        for (p, r) in probs.iter_mut().zip(row) {
            *p += pc * r;
        }
    }
    ProbLabel::new(probs)
}

/// Label for observed context `c`: row `c` of `p(z | c)`.
pub fn derive_label_ca_observed(ctx: &ContextModel, c: usize) -> Result<ProbLabel> {
    ctx.validate()?;
    let rows = ctx
        .cond_z_given_c
        .as_ref()
        .ok_or(Error::MissingDistribution("cond_z_given_c"))?;
    let row = rows.get(c).ok_or(Error::IndexOutOfRange {
        index: c,
        len: rows.len(),
    })?;
    ProbLabel::new(row.clone())
}

/// Normalized label `p(c | z) / p(c)` for observed context `c`.
///
/// Normalization leaves the weighted E-step unaffected (a common per-sample
/// factor cancels) but makes the label a proper distribution.
pub fn derive_label_wca(ctx: &ContextModel, c: usize) -> Result<ProbLabel> {
    ctx.validate()?;
    if !ctx.observed {
        return Err(Error::MissingDistribution("observed context"));
    }
    let rows = ctx
        .cond_c_given_z
        .as_ref()
        .ok_or(Error::MissingDistribution("cond_c_given_z"))?;
    let pc = *ctx.prior.get(c).ok_or(Error::IndexOutOfRange {
        index: c,
        len: ctx.prior.len(),
    })?;
    if pc <= 0.0 {
        return Err(Error::ZeroPrior);
    }
    let raw: Vec<f64> = rows.iter().map(|row| row[c] / pc).collect();
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroPrior);
    }
    ProbLabel::new(raw.iter().map(|v| v / total).collect())
}
