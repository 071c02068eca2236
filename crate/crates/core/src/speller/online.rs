//! Sliding-buffer online learning: a two-class shared-covariance Gaussian
//! classifier updated by a few context-aware EM iterations per incoming
//! sample.

use crate::error::{Error, Result};
use crate::labels::ProbLabel;
use crate::mixture::{ComponentParams, MixtureSpec};
use nalgebra::{Cholesky, DMatrix, DVector};
use std::collections::VecDeque;

/// Knobs of the per-sample update.
#[derive(Debug, Clone)]
pub struct OnlineConfig {
    /// Ring-buffer capacity in samples.
    pub capacity: usize,
    /// EM iterations per incoming sample; a fixed cap keeps runs reproducible
    /// where a wall-clock budget would not.
    pub online_iters: usize,
    /// Ridge added to the pooled covariance.
    pub ridge: f64,
    /// Samples required in the buffer before updates start; EM on a handful
    /// of points collapses the components onto them.
    pub warmup: usize,
}

impl Default for OnlineConfig {
    fn default() -> Self {
        Self {
            capacity: 240,
            online_iters: 3,
            ridge: 1e-6,
            warmup: 24,
        }
    }
}

/// The adaptive classifier state: the ring buffer and the current
/// shared-covariance two-Gaussian model.
#[derive(Debug, Clone)]
pub struct OnlineBuffer {
    entries: VecDeque<(DVector<f64>, ProbLabel, usize)>,
    capacity: usize,
    means: [DVector<f64>; 2],
    cov: DMatrix<f64>,
    weights: [f64; 2],
}

impl OnlineBuffer {
    /// Starts from an initial classifier (means, shared covariance, priors).
    pub fn new(
        capacity: usize,
        means: [DVector<f64>; 2],
        cov: DMatrix<f64>,
        weights: [f64; 2],
    ) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidParameter {
                name: "capacity",
                reason: "buffer capacity must be positive".to_string(),
            });
        }
        Ok(Self {
            entries: VecDeque::with_capacity(capacity),
            capacity,
            means,
            cov,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Current model as a full mixture specification (both components carry
    /// the shared covariance).
    pub fn spec(&self) -> Result<MixtureSpec> {
        let d = self.means[0].len();
        let cov_rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..d).map(|r| (0..d).map(|c| m[(r, c)]).collect()).collect()
        };
        MixtureSpec::new(
            vec![self.weights[0], self.weights[1]],
            vec![
                ComponentParams::MultivariateNormal {
                    mu: self.means[0].iter().copied().collect(),
                    cov: cov_rows(&self.cov),
                },
                ComponentParams::MultivariateNormal {
                    mu: self.means[1].iter().copied().collect(),
                    cov: cov_rows(&self.cov),
                },
            ],
        )
    }

    fn precision(&self) -> (DMatrix<f64>, f64) {
        let d = self.cov.nrows();
        let mut cov = self.cov.clone();
        loop {
            if let Some(chol) = Cholesky::new(cov.clone()) {
                let log_det = 2.0 * chol.l().diagonal().map(f64::ln).sum();
                return (chol.inverse(), log_det);
            }
            // degenerate covariance: ridge and continue
            cov += DMatrix::identity(d, d) * 1e-4;
        }
    }

    /// MAP class of a sample under the current model (shared covariance, so
    /// the quadratic terms differ only through the means).
    pub fn classify(&self, x: &DVector<f64>) -> usize {
        let (precision, _) = self.precision();
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for j in 0..2 {
            let u = x - &self.means[j];
            let score = self.weights[j].ln() - 0.5 * (&precision * &u).dot(&u);
            if score > best_score {
                best_score = score;
                best = j;
            }
        }
        best
    }

    /// Classifies the incoming sample, pushes it (evicting the oldest when
    /// full) and refreshes the model with a few context-aware EM iterations
    /// from the current state. Returns the class decision.
    pub fn step(
        &mut self,
        x: DVector<f64>,
        plabel: ProbLabel,
        truth: usize,
        cfg: &OnlineConfig,
    ) -> usize {
        let decision = self.classify(&x);
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back((x, plabel, truth));
        if self.entries.len() >= cfg.warmup.max(1) {
            for _ in 0..cfg.online_iters {
                self.em_iteration(cfg.ridge);
            }
        }
        decision
    }

    /// One context-aware EM iteration: responsibilities proportional to
    /// `p_ij f_j`, then weighted means and the pooled covariance.
    fn em_iteration(&mut self, ridge: f64) {
        let n = self.entries.len();
        if n == 0 {
            return;
        }
        let d = self.means[0].len();
        let (precision, _) = self.precision();

        let mut resp = vec![[0.0f64; 2]; n];
        for (i, (x, label, _)) in self.entries.iter().enumerate() {
            let mut logs = [0.0f64; 2];
            for j in 0..2 {
                let p = label.probs()[j];
                let u = x - &self.means[j];
                logs[j] = if p > 0.0 {
                    p.ln() - 0.5 * (&precision * &u).dot(&u)
                } else {
                    f64::NEG_INFINITY
                };
            }
            let max = logs[0].max(logs[1]);
            let e0 = (logs[0] - max).exp();
            let e1 = (logs[1] - max).exp();
            resp[i] = [e0 / (e0 + e1), e1 / (e0 + e1)];
        }

        let mut totals = [0.0f64; 2];
        let mut sums = [DVector::zeros(d), DVector::zeros(d)];
        for (i, (x, _, _)) in self.entries.iter().enumerate() {
            for j in 0..2 {
                totals[j] += resp[i][j];
                sums[j] += x * resp[i][j];
            }
        }
        for j in 0..2 {
            if totals[j] > 1e-12 {
                self.means[j] = &sums[j] / totals[j];
            }
        }

        let mut pooled = DMatrix::zeros(d, d);
        for (i, (x, _, _)) in self.entries.iter().enumerate() {
            for j in 0..2 {
                let u = x - &self.means[j];
                pooled.syger(resp[i][j], &u, &u, 1.0);
            }
        }
        pooled /= n as f64;
        for p in 0..d {
            for q in p + 1..d {
                pooled[(p, q)] = pooled[(q, p)];
            }
        }
        self.cov = pooled + DMatrix::identity(d, d) * ridge;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn setup(d: usize) -> OnlineBuffer {
        let m0 = DVector::from_element(d, 1.0);
        let m1 = DVector::from_element(d, -1.0);
        OnlineBuffer::new(50, [m0, m1], DMatrix::identity(d, d), [0.5, 0.5]).unwrap()
    }

    fn draw(rng: &mut impl Rng, center: f64, d: usize) -> DVector<f64> {
        DVector::from_fn(d, |_, _| center + rng.sample::<f64, _>(StandardNormal) * 0.5)
    }

    #[test]
    fn one_hot_labels_track_supervised_lda() {
        let d = 3;
        let mut supervised = setup(d);
        let mut ca = setup(d);
        let cfg = OnlineConfig {
            capacity: 50,
            online_iters: 2,
            ridge: 1e-6,
            warmup: 1,
        };
        let mut rng = derive_rng(1, &[]);
        for i in 0..200 {
            let class = i % 2;
            let x = draw(&mut rng, if class == 0 { 1.0 } else { -1.0 }, d);
            let label = ProbLabel::one_hot(2, class);
            let a = supervised.step(x.clone(), label.clone(), class, &cfg);
            let b = ca.step(x, label, class, &cfg);
            assert_eq!(a, b, "decision diverged at sample {i}");
        }
        assert_eq!(supervised.means[0], ca.means[0]);
        assert_eq!(supervised.cov, ca.cov);
    }

    #[test]
    fn adapts_to_shifted_classes() {
        let d = 2;
        let mut buf = setup(d);
        let cfg = OnlineConfig {
            capacity: 50,
            online_iters: 3,
            ridge: 1e-6,
            warmup: 1,
        };
        let mut rng = derive_rng(2, &[]);
        // classes actually live at +3/-3: the buffer should walk its means out
        let mut correct = 0;
        let mut total = 0;
        for i in 0..300 {
            let class = i % 2;
            let center = if class == 0 { 3.0 } else { -3.0 };
            let x = draw(&mut rng, center, d);
            let label = crate::labels::make_label(0.8, 2, class).unwrap();
            let dec = buf.step(x, label, class, &cfg);
            if i >= 100 {
                total += 1;
                if dec == class {
                    correct += 1;
                }
            }
        }
        assert!(buf.means[0][0] > 2.0, "mean did not track: {}", buf.means[0][0]);
        assert!(correct as f64 / total as f64 > 0.95);
    }

    #[test]
    fn degenerate_buffer_survives_via_ridge() {
        let d = 2;
        let mut buf = setup(d);
        let cfg = OnlineConfig {
            capacity: 50,
            online_iters: 3,
            ridge: 1e-6,
            warmup: 1,
        };
        // identical samples collapse the pooled covariance; the ridge keeps
        // the model usable
        let x = DVector::from_element(d, 0.7);
        for _ in 0..60 {
            buf.step(x.clone(), ProbLabel::uniform(2), 0, &cfg);
        }
        let spec = buf.spec().unwrap();
        assert_eq!(spec.n_components(), 2);
        assert!(buf.classify(&x) < 2);
    }

    #[test]
    fn spec_exports_shared_covariance() {
        let buf = setup(4);
        let spec = buf.spec().unwrap();
        assert_eq!(spec.component(0).cov_matrix(), spec.component(1).cov_matrix());
    }
}
