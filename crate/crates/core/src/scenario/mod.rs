//! Monte Carlo scenario harness: problem generation, estimator comparison
//! across negentropy grids, metrics, significance testing and table output.

mod generate;
mod landscape;
mod metrics;
mod mip_experiment;
mod run;
mod stats;
pub mod tables;

pub use generate::{generate_problem, ProblemInstance};
pub use landscape::{landscape, LandscapeConfig, LandscapePoint};
pub use metrics::{balanced_accuracy, class_bias, param_distance, plain_accuracy, regression_mse};
pub use mip_experiment::{mip_experiment, mip_experiment_rows, MipAggregate, MipConfig, MipRow};
pub use run::{run_problem, run_scenario};
pub use stats::wilcoxon_ranksum;

use crate::error::{Error, Result};
use crate::estim::AlgorithmTag;
use serde::Serialize;

/// The estimation scenarios the harness can reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioId {
    /// Two univariate Gaussians, only the means estimated.
    A,
    /// Two univariate Gaussians, all parameters estimated.
    B,
    /// Three univariate Gaussians.
    C,
    /// Two 2-dimensional Gaussians.
    D,
    /// Two Maxwell-Boltzmann components.
    E,
    /// Two first-order linear regressors.
    F,
    /// Scenario B data with per-sample negentropy drawn from U[0, 0.5].
    Mixed,
    /// Scenario B data with a fraction of misleading labels.
    Wrong,
    /// Scenario B with an unbalanced actual mixing weight.
    Biased,
}

impl ScenarioId {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::A => "a",
            ScenarioId::B => "b",
            ScenarioId::C => "c",
            ScenarioId::D => "d",
            ScenarioId::E => "e",
            ScenarioId::F => "f",
            ScenarioId::Mixed => "mixed",
            ScenarioId::Wrong => "wrong",
            ScenarioId::Biased => "biased",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "a" => ScenarioId::A,
            "b" => ScenarioId::B,
            "c" => ScenarioId::C,
            "d" => ScenarioId::D,
            "e" => ScenarioId::E,
            "f" => ScenarioId::F,
            "mixed" => ScenarioId::Mixed,
            "wrong" => ScenarioId::Wrong,
            "biased" => ScenarioId::Biased,
            other => {
                return Err(Error::InvalidParameter {
                    name: "scenario",
                    reason: format!("unknown scenario id {other:?}"),
                })
            }
        })
    }

    pub(crate) fn code(self) -> u64 {
        match self {
            ScenarioId::A => 1,
            ScenarioId::B => 2,
            ScenarioId::C => 3,
            ScenarioId::D => 4,
            ScenarioId::E => 5,
            ScenarioId::F => 6,
            ScenarioId::Mixed => 7,
            ScenarioId::Wrong => 8,
            ScenarioId::Biased => 9,
        }
    }

    pub fn n_components(self) -> usize {
        match self {
            ScenarioId::C => 3,
            _ => 2,
        }
    }

    /// Context-aware estimators get one row per negentropy level except in
    /// the mixed scenario, where the per-sample negentropy is random.
    pub fn uses_ne_grid(self) -> bool {
        !matches!(self, ScenarioId::Mixed)
    }
}

/// Full description of one harness run.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSpec {
    pub id: ScenarioId,
    pub problems: usize,
    pub ne_grid: Vec<f64>,
    /// Fraction of misleading labels (wrong scenario only).
    pub wrong_frac: f64,
    /// Actual first mixing weight (biased scenario only).
    pub pi1: f64,
    pub master_seed: u64,
}

/// Default negentropy grid: 0, 0.1, ..., 0.9 plus 0.99 (1 would reduce every
/// context-aware estimator to the supervised one).
pub fn default_ne_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).collect();
    grid.push(0.99);
    grid
}

impl ScenarioSpec {
    pub fn new(id: ScenarioId, problems: usize, master_seed: u64) -> Self {
        Self {
            id,
            problems,
            ne_grid: default_ne_grid(),
            wrong_frac: 0.2,
            pi1: 0.2,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.problems == 0 {
            return Err(Error::InvalidParameter {
                name: "problems",
                reason: "need at least one problem".to_string(),
            });
        }
        if self.ne_grid.iter().any(|&ne| !(0.0..1.0).contains(&ne)) {
            return Err(Error::InvalidParameter {
                name: "ne_grid",
                reason: "levels must lie in [0, 1)".to_string(),
            });
        }
        if self.id == ScenarioId::Wrong && !(0.1..=0.9).contains(&self.wrong_frac) {
            return Err(Error::InvalidParameter {
                name: "wrong_frac",
                reason: format!("must lie in [0.1, 0.9], got {}", self.wrong_frac),
            });
        }
        if self.id == ScenarioId::Biased && !(0.1..=0.9).contains(&self.pi1) {
            return Err(Error::InvalidParameter {
                name: "pi1",
                reason: format!("must lie in [0.1, 0.9], got {}", self.pi1),
            });
        }
        Ok(())
    }
}

/// One (problem, estimator, negentropy) result.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub scenario: &'static str,
    pub problem_id: usize,
    pub algorithm: AlgorithmTag,
    /// Shared negentropy of the labels, or their mean in the mixed scenario;
    /// absent for the context-independent estimators.
    pub ne: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Euclidean distance of the free parameters from the actual values.
    pub d: f64,
    /// Mean standard error over the estimator's active parameters.
    pub ase: Option<f64>,
    /// Theoretical convergence rate `1 - spectral radius`.
    pub r_prime: Option<f64>,
    pub acc: Option<f64>,
    pub ba: Option<f64>,
    pub mse: Option<f64>,
    pub bias_b: Option<f64>,
    /// Master seed the row derives from; with the scenario id, problem id and
    /// ne it re-derives the row's streams.
    pub seed: u64,
    /// Spectral radius at or above one at the final point.
    #[serde(skip)]
    pub spectral_ge_one: bool,
    /// Information matrices invertible at the final point.
    #[serde(skip)]
    pub regular: bool,
}

/// Per (algorithm, ne) summary statistics.
#[derive(Debug, Clone, Serialize)]
pub struct AggregateRow {
    pub scenario: &'static str,
    pub algorithm: AlgorithmTag,
    pub ne: Option<f64>,
    pub n: usize,
    pub n_unconverged: usize,
    pub n_spectral_ge_one: usize,
    pub n_nonregular: usize,
    pub d_mean: f64,
    pub d_std: f64,
    pub ase_mean: Option<f64>,
    pub ase_std: Option<f64>,
    pub r_prime_mean: Option<f64>,
    pub r_prime_std: Option<f64>,
    pub acc_mean: Option<f64>,
    pub acc_std: Option<f64>,
    pub ba_mean: Option<f64>,
    pub ba_std: Option<f64>,
    pub mse_mean: Option<f64>,
    pub mse_std: Option<f64>,
    pub bias_mean: Option<f64>,
    pub bias_std: Option<f64>,
}

/// One pairwise Wilcoxon comparison.
#[derive(Debug, Clone, Serialize)]
pub struct SignificanceRow {
    pub metric: &'static str,
    pub alg_a: AlgorithmTag,
    pub ne_a: Option<f64>,
    pub alg_b: AlgorithmTag,
    pub ne_b: Option<f64>,
    pub p_value: f64,
    /// p below the 0.01 level.
    pub significant: bool,
}

/// Everything a harness run produces.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub spec: ScenarioSpec,
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<AggregateRow>,
    pub significance: Vec<SignificanceRow>,
    /// Problems that could not be generated (root finding exhausted retries).
    pub generation_failures: usize,
    /// Total regeneration attempts across problems.
    pub generation_retries: usize,
}

impl ScenarioReport {
    /// Looks up a pairwise comparison.
    pub fn significance_for(
        &self,
        metric: &str,
        alg_a: AlgorithmTag,
        ne_a: Option<f64>,
        alg_b: AlgorithmTag,
        ne_b: Option<f64>,
    ) -> Option<&SignificanceRow> {
        let close = |x: Option<f64>, y: Option<f64>| match (x, y) {
            (None, None) => true,
            (Some(a), Some(b)) => (a - b).abs() < 1e-12,
            _ => false,
        };
        self.significance.iter().find(|s| {
            s.metric == metric
                && s.alg_a == alg_a
                && s.alg_b == alg_b
                && close(s.ne_a, ne_a)
                && close(s.ne_b, ne_b)
        })
    }

    /// Mean of a metric over the rows of one (algorithm, ne) cell.
    pub fn mean_of(
        &self,
        algorithm: AlgorithmTag,
        ne: Option<f64>,
        metric: impl Fn(&ResultRow) -> Option<f64>,
    ) -> Option<f64> {
        let close = |x: Option<f64>, y: Option<f64>| match (x, y) {
            (None, None) => true,
            (Some(a), Some(b)) => (a - b).abs() < 1e-12,
            _ => false,
        };
        let vals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.algorithm == algorithm && close(r.ne, ne))
            .filter_map(metric)
            .collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }
}
