//! The EM engine: pluggable E-steps (US, CA, WCA), the non-iterative S and
//! DCA estimators, per-family M-steps and the fit driver.

mod estep;
mod fit;
mod mstep;

pub use estep::{
    ca_mixing_estimator, classify_map, e_step, incomplete_loglik, q_and_entropy,
};
pub use fit::{fit, FitResult};
pub use mstep::m_step;

use crate::labels::ProbLabel;
use serde::Serialize;
use crate::params::ParamMask;

/// Estimator selection, carrying whatever side-information it needs.
#[derive(Debug, Clone)]
pub enum Algorithm {
    /// Plain unsupervised EM.
    Unsupervised,
    /// Supervised maximum likelihood on the dataset's ground-truth labels.
    Supervised,
    /// Context-aware EM: probabilistic labels replace the mixing weights in
    /// the E-step and the objective.
    ContextAware(Vec<ProbLabel>),
    /// Weighted context-aware EM: probabilistic labels multiply the standard
    /// E-step terms.
    WeightedContextAware(Vec<ProbLabel>),
    /// Direct context-aware estimation: the labels are the responsibilities.
    DirectContextAware(Vec<ProbLabel>),
}

/// Bare estimator name, for dispatch and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum AlgorithmTag {
    US,
    S,
    CA,
    WCA,
    DCA,
}

impl std::fmt::Display for AlgorithmTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            AlgorithmTag::US => "US",
            AlgorithmTag::S => "S",
            AlgorithmTag::CA => "CA",
            AlgorithmTag::WCA => "WCA",
            AlgorithmTag::DCA => "DCA",
        };
        f.write_str(s)
    }
}

impl Algorithm {
    pub fn tag(&self) -> AlgorithmTag {
        match self {
            Algorithm::Unsupervised => AlgorithmTag::US,
            Algorithm::Supervised => AlgorithmTag::S,
            Algorithm::ContextAware(_) => AlgorithmTag::CA,
            Algorithm::WeightedContextAware(_) => AlgorithmTag::WCA,
            Algorithm::DirectContextAware(_) => AlgorithmTag::DCA,
        }
    }

    pub fn plabels(&self) -> Option<&[ProbLabel]> {
        match self {
            Algorithm::ContextAware(p)
            | Algorithm::WeightedContextAware(p)
            | Algorithm::DirectContextAware(p) => Some(p),
            _ => None,
        }
    }

    /// Whether the estimator's own objective involves the mixing weights.
    /// CA's does not; its weights come from a side estimator after the fit.
    pub fn estimates_weights(&self) -> bool {
        !matches!(self, Algorithm::ContextAware(_))
    }
}

/// Stopping rule, iteration cap and M-step regularization for [`fit`].
#[derive(Debug, Clone)]
pub struct FitConfig {
    /// Parameter-change threshold on the Euclidean norm of the ordered
    /// parameter vector.
    pub tol: f64,
    /// Iteration cap; the estimate at the cap is returned unconverged.
    pub max_iter: usize,
    /// Variance floor and covariance ridge applied in the M-step.
    pub m_step_regularization: f64,
    /// Optional wall-clock budget. Stops iterating once exceeded; leaves the
    /// run non-reproducible, so the simulators use fixed iteration caps
    /// instead.
    pub iter_budget_ms: Option<u64>,
    /// Free-parameter mask; masked parameters are copied from the initial
    /// spec on every M-step. `None` frees everything.
    pub mask: Option<ParamMask>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            max_iter: 300,
            m_step_regularization: 1e-8,
            iter_budget_ms: None,
            mask: None,
        }
    }
}

impl FitConfig {
    pub fn with_mask(mut self, mask: ParamMask) -> Self {
        self.mask = Some(mask);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }
}
