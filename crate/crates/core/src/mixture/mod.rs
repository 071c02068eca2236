//! Mixture families: parameter types, densities, derivatives, sampling and
//! Kullback-Leibler divergences.

mod density;
mod kl;
mod sample;

pub use density::{
    component_log_density, component_log_density_hessian, component_score, mixture_density,
    PreparedComponent,
};
pub use kl::{component_kl, solve_param_for_kl, FreeAxis, KlDirection};
pub use sample::{sample_component, sample_mixture, sample_mixture_with, SampleConfig};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// A single observation. Scalar for univariate families, vector for
/// multivariate Gaussians, covariate/response pair for regressors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Observation {
    Scalar(f64),
    Vector(Vec<f64>),
    Pair { x: f64, y: f64 },
}

impl Observation {
    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Observation::Scalar(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<DVector<f64>> {
        match self {
            Observation::Vector(v) => Some(DVector::from_column_slice(v)),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(f64, f64)> {
        match self {
            Observation::Pair { x, y } => Some((*x, *y)),
            _ => None,
        }
    }
}

/// Family tag shared by all components of a mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    UnivariateNormal,
    MultivariateNormal,
    MaxwellBoltzmann,
    LinearRegressor,
}

/// Parameters of one mixture component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentParams {
    UnivariateNormal {
        mu: f64,
        /// Standard deviation, strictly positive.
        sigma: f64,
    },
    MultivariateNormal {
        mu: Vec<f64>,
        /// Row-major square covariance matrix; symmetric positive definite.
        cov: Vec<Vec<f64>>,
    },
    MaxwellBoltzmann {
        /// Scale, strictly positive.
        a: f64,
    },
    LinearRegressor {
        beta0: f64,
        beta1: f64,
        /// Residual standard deviation, strictly positive.
        eps: f64,
    },
}

impl ComponentParams {
    pub fn family(&self) -> Family {
        match self {
            ComponentParams::UnivariateNormal { .. } => Family::UnivariateNormal,
            ComponentParams::MultivariateNormal { .. } => Family::MultivariateNormal,
            ComponentParams::MaxwellBoltzmann { .. } => Family::MaxwellBoltzmann,
            ComponentParams::LinearRegressor { .. } => Family::LinearRegressor,
        }
    }

    /// Input dimension: `d` for multivariate Gaussians, 1 otherwise.
    pub fn dim(&self) -> usize {
        match self {
            ComponentParams::MultivariateNormal { mu, .. } => mu.len(),
            _ => 1,
        }
    }

    /// Number of free parameters of this component in the canonical ordering.
    ///
    /// Orderings: univariate normal `(mu, sigma)`; multivariate normal mean
    /// entries in order followed by the lower-triangular covariance entries
    /// column by column; Maxwell-Boltzmann `(a)`; regressor `(beta0, beta1, eps)`.
    pub fn param_count(&self) -> usize {
        match self {
            ComponentParams::UnivariateNormal { .. } => 2,
            ComponentParams::MultivariateNormal { mu, .. } => {
                let d = mu.len();
                d + d * (d + 1) / 2
            }
            ComponentParams::MaxwellBoltzmann { .. } => 1,
            ComponentParams::LinearRegressor { .. } => 3,
        }
    }

    /// Human-readable name of the `idx`-th parameter, used in reports.
    pub fn param_name(&self, idx: usize) -> String {
        match self {
            ComponentParams::UnivariateNormal { .. } => ["mu", "sigma"][idx].to_string(),
            ComponentParams::MultivariateNormal { mu, .. } => {
                let d = mu.len();
                if idx < d {
                    format!("mu{}", idx + 1)
                } else {
                    let (p, q) = cov_tri_index(d, idx - d);
                    format!("cov{}{}", p + 1, q + 1)
                }
            }
            ComponentParams::MaxwellBoltzmann { .. } => "a".to_string(),
            ComponentParams::LinearRegressor { .. } => ["beta0", "beta1", "eps"][idx].to_string(),
        }
    }

    /// Reads the `idx`-th parameter in the canonical ordering.
    pub fn get_param(&self, idx: usize) -> f64 {
        match self {
            ComponentParams::UnivariateNormal { mu, sigma } => [*mu, *sigma][idx],
            ComponentParams::MultivariateNormal { mu, cov } => {
                let d = mu.len();
                if idx < d {
                    mu[idx]
                } else {
                    let (p, q) = cov_tri_index(d, idx - d);
                    cov[p][q]
                }
            }
            ComponentParams::MaxwellBoltzmann { a } => [*a][idx],
            ComponentParams::LinearRegressor { beta0, beta1, eps } => [*beta0, *beta1, *eps][idx],
        }
    }

    /// Writes the `idx`-th parameter, mirroring symmetric covariance entries.
    pub fn set_param(&mut self, idx: usize, value: f64) {
        match self {
            ComponentParams::UnivariateNormal { mu, sigma } => match idx {
                0 => *mu = value,
                _ => *sigma = value,
            },
            ComponentParams::MultivariateNormal { mu, cov } => {
                let d = mu.len();
                if idx < d {
                    mu[idx] = value;
                } else {
                    let (p, q) = cov_tri_index(d, idx - d);
                    cov[p][q] = value;
                    cov[q][p] = value;
                }
            }
            ComponentParams::MaxwellBoltzmann { a } => *a = value,
            ComponentParams::LinearRegressor { beta0, beta1, eps } => match idx {
                0 => *beta0 = value,
                1 => *beta1 = value,
                _ => *eps = value,
            },
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match self {
            ComponentParams::UnivariateNormal { sigma, .. } => {
                if !(*sigma > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "sigma",
                        reason: format!("must be > 0, got {sigma}"),
                    });
                }
            }
            ComponentParams::MultivariateNormal { mu, cov } => {
                let d = mu.len();
                if cov.len() != d || cov.iter().any(|row| row.len() != d) {
                    return Err(Error::DimensionMismatch(format!(
                        "covariance must be {d}x{d}"
                    )));
                }
                let m = self.cov_matrix().unwrap();
                if (&m - m.transpose()).amax() > 1e-9 * (1.0 + m.amax()) {
                    return Err(Error::InvalidParameter {
                        name: "cov",
                        reason: "must be symmetric".to_string(),
                    });
                }
                if nalgebra::Cholesky::new(m).is_none() {
                    return Err(Error::SingularCovariance);
                }
            }
            ComponentParams::MaxwellBoltzmann { a } => {
                if !(*a > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "a",
                        reason: format!("must be > 0, got {a}"),
                    });
                }
            }
            ComponentParams::LinearRegressor { eps, .. } => {
                if !(*eps > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "eps",
                        reason: format!("must be > 0, got {eps}"),
                    });
                }
            }
        }
        Ok(())
    }

    pub(crate) fn cov_matrix(&self) -> Option<DMatrix<f64>> {
        match self {
            ComponentParams::MultivariateNormal { mu, cov } => {
                let d = mu.len();
                Some(DMatrix::from_fn(d, d, |r, c| cov[r][c]))
            }
            _ => None,
        }
    }
}

/// Maps a flat lower-triangle offset to `(row, col)` with `row >= col`,
/// walking the triangle column by column.
pub(crate) fn cov_tri_index(d: usize, offset: usize) -> (usize, usize) {
    let mut k = offset;
    for q in 0..d {
        let col_len = d - q;
        if k < col_len {
            return (q + k, q);
        }
        k -= col_len;
    }
    panic!("triangle offset {offset} out of range for d={d}");
}

/// A fully parameterized finite mixture: weights plus per-component parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    weights: Vec<f64>,
    components: Vec<ComponentParams>,
}

impl MixtureSpec {
    /// Builds and validates a mixture specification.
    pub fn new(weights: Vec<f64>, components: Vec<ComponentParams>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "components",
                reason: "a mixture needs at least two components".to_string(),
            });
        }
        if weights.len() != components.len() {
            return Err(Error::LengthMismatch {
                what: "weights",
                got: weights.len(),
                expected: components.len(),
            });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: format!("must sum to 1, got {sum}"),
            });
        }
        if weights.iter().any(|&w| !(w > 0.0 && w < 1.0)) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "each weight must lie in (0, 1)".to_string(),
            });
        }
        let family = components[0].family();
        let dim = components[0].dim();
        for c in &components {
            if c.family() != family || c.dim() != dim {
                return Err(Error::FamilyMismatch);
            }
            c.validate()?;
        }
        Ok(Self {
            weights,
            components,
        })
    }

    /// Internal constructor for perturbed intermediates (finite differences,
    /// M-step output before validity is re-established).
    pub(crate) fn new_unchecked(weights: Vec<f64>, components: Vec<ComponentParams>) -> Self {
        Self {
            weights,
            components,
        }
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn family(&self) -> Family {
        self.components[0].family()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[ComponentParams] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &ComponentParams {
        &self.components[j]
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub(crate) fn components_mut(&mut self) -> &mut [ComponentParams] {
        &mut self.components
    }
}

impl Serialize for MixtureSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc<'a> {
            family: Family,
            weights: &'a [f64],
            components: &'a [ComponentParams],
        }
        Doc {
            family: self.family(),
            weights: &self.weights,
            components: &self.components,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MixtureSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Doc {
            family: Family,
            weights: Vec<f64>,
            components: Vec<serde_json::Value>,
        }
        let doc = Doc::deserialize(deserializer)?;
        let components: Vec<ComponentParams> = doc
            .components
            .into_iter()
            .map(|v| parse_component(doc.family, v))
            .collect::<std::result::Result<_, String>>()
            .map_err(serde::de::Error::custom)?;
        MixtureSpec::new(doc.weights, components).map_err(serde::de::Error::custom)
    }
}

fn parse_component(
    family: Family,
    value: serde_json::Value,
) -> std::result::Result<ComponentParams, String> {
    let err = |e: serde_json::Error| e.to_string();
    match family {
        Family::UnivariateNormal => {
            #[derive(Deserialize)]
            struct C {
                mu: f64,
                sigma: f64,
            }
            let c: C = serde_json::from_value(value).map_err(err)?;
            Ok(ComponentParams::UnivariateNormal {
                mu: c.mu,
                sigma: c.sigma,
            })
        }
        Family::MultivariateNormal => {
            #[derive(Deserialize)]
            struct C {
                mu: Vec<f64>,
                cov: Vec<Vec<f64>>,
            }
            let c: C = serde_json::from_value(value).map_err(err)?;
            Ok(ComponentParams::MultivariateNormal {
                mu: c.mu,
                cov: c.cov,
            })
        }
        Family::MaxwellBoltzmann => {
            #[derive(Deserialize)]
            struct C {
                a: f64,
            }
            let c: C = serde_json::from_value(value).map_err(err)?;
            Ok(ComponentParams::MaxwellBoltzmann { a: c.a })
        }
        Family::LinearRegressor => {
            #[derive(Deserialize)]
            struct C {
                beta0: f64,
                beta1: f64,
                eps: f64,
            }
            let c: C = serde_json::from_value(value).map_err(err)?;
            Ok(ComponentParams::LinearRegressor {
                beta0: c.beta0,
                beta1: c.beta1,
                eps: c.eps,
            })
        }
    }
}

/// Observed samples with ground-truth component indices (0-based) and optional
/// per-sample probabilistic labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub samples: Vec<Observation>,
    pub truth: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub plabels: Option<Vec<crate::labels::ProbLabel>>,
}

impl LabeledDataset {
    pub fn new(samples: Vec<Observation>, truth: Vec<usize>) -> Result<Self> {
        if samples.len() != truth.len() {
            return Err(Error::LengthMismatch {
                what: "truth",
                got: truth.len(),
                expected: samples.len(),
            });
        }
        Ok(Self {
            samples,
            truth,
            plabels: None,
        })
    }

    pub fn with_plabels(mut self, plabels: Vec<crate::labels::ProbLabel>) -> Result<Self> {
        if plabels.len() != self.samples.len() {
            return Err(Error::LengthMismatch {
                what: "plabels",
                got: plabels.len(),
                expected: self.samples.len(),
            });
        }
        self.plabels = Some(plabels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}
