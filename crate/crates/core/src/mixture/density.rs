//! Log densities and their first and second derivatives with respect to the
//! component parameters, in the canonical parameter ordering.

use super::{cov_tri_index, ComponentParams, MixtureSpec, Observation};
use crate::error::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector};

const LN_2PI: f64 = 1.8378770664093453;

/// Log density of one component at an observation.
pub fn component_log_density(c: &ComponentParams, x: &Observation) -> Result<f64> {
    PreparedComponent::new(c)?.log_density(x)
}

/// Mixture density `sum_j w_j f_j(x)`.
pub fn mixture_density(m: &MixtureSpec, x: &Observation) -> Result<f64> {
    let mut total = 0.0;
    for (w, c) in m.weights().iter().zip(m.components()) {
        total += w * component_log_density(c, x)?.exp();
    }
    Ok(total)
}

/// Gradient of the component log density with respect to its free parameters.
pub fn component_score(c: &ComponentParams, x: &Observation) -> Result<DVector<f64>> {
    match (c, x) {
        (ComponentParams::UnivariateNormal { mu, sigma }, Observation::Scalar(v)) => {
            let u = v - mu;
            let s2 = sigma * sigma;
            Ok(DVector::from_vec(vec![
                u / s2,
                -1.0 / sigma + u * u / (s2 * sigma),
            ]))
        }
        (ComponentParams::MultivariateNormal { .. }, Observation::Vector(_)) => {
            let prepared = PreparedComponent::new(c)?;
            prepared.mvn_score(x)
        }
        (ComponentParams::MaxwellBoltzmann { a }, Observation::Scalar(v)) => {
            if *v <= 0.0 {
                return Err(Error::Domain(format!(
                    "Maxwell-Boltzmann support is x > 0, got {v}"
                )));
            }
            Ok(DVector::from_vec(vec![v * v / (a * a * a) - 3.0 / a]))
        }
        (ComponentParams::LinearRegressor { beta0, beta1, eps }, Observation::Pair { x, y }) => {
            let r = y - beta0 - beta1 * x;
            let e2 = eps * eps;
            Ok(DVector::from_vec(vec![
                r / e2,
                r * x / e2,
                -1.0 / eps + r * r / (e2 * eps),
            ]))
        }
        _ => Err(Error::Domain(
            "observation kind does not match the component family".to_string(),
        )),
    }
}

/// Symmetric matrix of second partials of the component log density.
pub fn component_log_density_hessian(
    c: &ComponentParams,
    x: &Observation,
) -> Result<DMatrix<f64>> {
    match (c, x) {
        (ComponentParams::UnivariateNormal { mu, sigma }, Observation::Scalar(v)) => {
            let u = v - mu;
            let s2 = sigma * sigma;
            let s3 = s2 * sigma;
            let s4 = s2 * s2;
            Ok(DMatrix::from_row_slice(
                2,
                2,
                &[
                    -1.0 / s2,
                    -2.0 * u / s3,
                    -2.0 * u / s3,
                    1.0 / s2 - 3.0 * u * u / s4,
                ],
            ))
        }
        (ComponentParams::MultivariateNormal { .. }, Observation::Vector(_)) => {
            PreparedComponent::new(c)?.mvn_hessian(x)
        }
        (ComponentParams::MaxwellBoltzmann { a }, Observation::Scalar(v)) => {
            if *v <= 0.0 {
                return Err(Error::Domain(format!(
                    "Maxwell-Boltzmann support is x > 0, got {v}"
                )));
            }
            let a2 = a * a;
            Ok(DMatrix::from_element(
                1,
                1,
                3.0 / a2 - 3.0 * v * v / (a2 * a2),
            ))
        }
        (ComponentParams::LinearRegressor { beta0, beta1, eps }, Observation::Pair { x, y }) => {
            let r = y - beta0 - beta1 * x;
            let e2 = eps * eps;
            let e3 = e2 * eps;
            let e4 = e2 * e2;
            Ok(DMatrix::from_row_slice(
                3,
                3,
                &[
                    -1.0 / e2,
                    -x / e2,
                    -2.0 * r / e3,
                    -x / e2,
                    -x * x / e2,
                    -2.0 * r * x / e3,
                    -2.0 * r / e3,
                    -2.0 * r * x / e3,
                    1.0 / e2 - 3.0 * r * r / e4,
                ],
            ))
        }
        _ => Err(Error::Domain(
            "observation kind does not match the component family".to_string(),
        )),
    }
}

/// Per-component evaluation state with factorizations hoisted out of sample
/// loops.
#[derive(Debug, Clone)]
pub enum PreparedComponent {
    UnivariateNormal {
        mu: f64,
        sigma: f64,
        log_norm: f64,
    },
    MultivariateNormal {
        mu: DVector<f64>,
        precision: DMatrix<f64>,
        log_norm: f64,
    },
    MaxwellBoltzmann {
        a: f64,
        log_norm: f64,
    },
    LinearRegressor {
        beta0: f64,
        beta1: f64,
        eps: f64,
        log_norm: f64,
    },
}

impl PreparedComponent {
    pub fn new(c: &ComponentParams) -> Result<Self> {
        Ok(match c {
            ComponentParams::UnivariateNormal { mu, sigma } => {
                if !(*sigma > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "sigma",
                        reason: format!("must be > 0, got {sigma}"),
                    });
                }
                PreparedComponent::UnivariateNormal {
                    mu: *mu,
                    sigma: *sigma,
                    log_norm: -0.5 * LN_2PI - sigma.ln(),
                }
            }
            ComponentParams::MultivariateNormal { mu, .. } => {
                let d = mu.len();
                let cov = c.cov_matrix().unwrap();
                let chol = Cholesky::new(cov).ok_or(Error::SingularCovariance)?;
                let log_det = 2.0 * chol.l().diagonal().map(f64::ln).sum();
                PreparedComponent::MultivariateNormal {
                    mu: DVector::from_column_slice(mu),
                    precision: chol.inverse(),
                    log_norm: -0.5 * (d as f64 * LN_2PI + log_det),
                }
            }
            ComponentParams::MaxwellBoltzmann { a } => {
                if !(*a > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "a",
                        reason: format!("must be > 0, got {a}"),
                    });
                }
                PreparedComponent::MaxwellBoltzmann {
                    a: *a,
                    // sqrt(2/pi) / a^3
                    log_norm: 0.5 * (2.0 / std::f64::consts::PI).ln() - 3.0 * a.ln(),
                }
            }
            ComponentParams::LinearRegressor { beta0, beta1, eps } => {
                if !(*eps > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "eps",
                        reason: format!("must be > 0, got {eps}"),
                    });
                }
                PreparedComponent::LinearRegressor {
                    beta0: *beta0,
                    beta1: *beta1,
                    eps: *eps,
                    log_norm: -0.5 * LN_2PI - eps.ln(),
                }
            }
        })
    }

    pub fn log_density(&self, x: &Observation) -> Result<f64> {
        match (self, x) {
            (
                PreparedComponent::UnivariateNormal { mu, sigma, log_norm },
                Observation::Scalar(v),
            ) => {
                let z = (v - mu) / sigma;
                Ok(log_norm - 0.5 * z * z)
            }
            (
                PreparedComponent::MultivariateNormal {
                    mu,
                    precision,
                    log_norm,
                },
                Observation::Vector(v),
            ) => {
                if v.len() != mu.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "observation has dim {}, component has dim {}",
                        v.len(),
                        mu.len()
                    )));
                }
                let u = DVector::from_column_slice(v) - mu;
                Ok(log_norm - 0.5 * (precision * &u).dot(&u))
            }
            (PreparedComponent::MaxwellBoltzmann { a, log_norm }, Observation::Scalar(v)) => {
                if *v <= 0.0 {
                    return Err(Error::Domain(format!(
                        "Maxwell-Boltzmann support is x > 0, got {v}"
                    )));
                }
                Ok(log_norm + 2.0 * v.ln() - v * v / (2.0 * a * a))
            }
            (
                PreparedComponent::LinearRegressor {
                    beta0,
                    beta1,
                    eps,
                    log_norm,
                },
                Observation::Pair { x, y },
            ) => {
                let z = (y - beta0 - beta1 * x) / eps;
                Ok(log_norm - 0.5 * z * z)
            }
            _ => Err(Error::Domain(
                "observation kind does not match the component family".to_string(),
            )),
        }
    }

    fn mvn_score(&self, x: &Observation) -> Result<DVector<f64>> {
        let (mu, precision) = match self {
            PreparedComponent::MultivariateNormal { mu, precision, .. } => (mu, precision),
            _ => unreachable!(),
        };
        let v = x.as_vector().ok_or_else(|| {
            Error::Domain("multivariate component needs a vector observation".to_string())
        })?;
        let d = mu.len();
        let u = v - mu;
        let pu = precision * &u;
        // d log f / d cov_pq = (2 - delta_pq)/2 * [(P u)(P u)^T - P]_pq
        let outer = &pu * pu.transpose();
        let mut score = DVector::zeros(d + d * (d + 1) / 2);
        for i in 0..d {
            score[i] = pu[i];
        }
        for off in 0..d * (d + 1) / 2 {
            let (p, q) = cov_tri_index(d, off);
            let mult = if p == q { 0.5 } else { 1.0 };
            score[d + off] = mult * (outer[(p, q)] - precision[(p, q)]);
        }
        Ok(score)
    }

    fn mvn_hessian(&self, x: &Observation) -> Result<DMatrix<f64>> {
        let (mu, precision) = match self {
            PreparedComponent::MultivariateNormal { mu, precision, .. } => (mu, precision),
            _ => unreachable!(),
        };
        let v = x.as_vector().ok_or_else(|| {
            Error::Domain("multivariate component needs a vector observation".to_string())
        })?;
        let d = mu.len();
        let tri = d * (d + 1) / 2;
        let w = d + tri;
        let u = v - mu;
        let pu = precision * &u;
        let mut hess = DMatrix::zeros(w, w);

        // mean-mean block: -P
        for a in 0..d {
            for b in 0..d {
                hess[(a, b)] = -precision[(a, b)];
            }
        }

        // symmetrized basis matrix for the (p, q) covariance entry
        let basis = |p: usize, q: usize| {
            let mut e = DMatrix::zeros(d, d);
            e[(p, q)] = 1.0;
            e[(q, p)] = 1.0;
            e
        };

        // mean-cov block: d(Pu)_a / d cov_pq = (-P E_pq P u)_a
        for off in 0..tri {
            let (p, q) = cov_tri_index(d, off);
            let dpu = -(precision * basis(p, q) * &pu);
            for a in 0..d {
                hess[(a, d + off)] = dpu[a];
                hess[(d + off, a)] = dpu[a];
            }
        }

        // cov-cov block
        let outer = &pu * pu.transpose();
        for off1 in 0..tri {
            let (p, q) = cov_tri_index(d, off1);
            let mult = if p == q { 0.5 } else { 1.0 };
            for off2 in 0..tri {
                let (r, s) = cov_tri_index(d, off2);
                let perp = precision * basis(r, s) * precision;
                let douter = -(&perp * &u) * pu.transpose() - &outer * basis(r, s) * precision;
                let val = mult * (douter[(p, q)] + perp[(p, q)]);
                hess[(d + off1, d + off2)] = val;
            }
        }
        // enforce exact symmetry against round-off in the cov-cov block
        let sym = (&hess + hess.transpose()) * 0.5;
        Ok(sym)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn finite_diff_score(c: &ComponentParams, x: &Observation, h: f64) -> DVector<f64> {
        let n = c.param_count();
        DVector::from_fn(n, |i, _| {
            let scale = h * (1.0 + c.get_param(i).abs());
            let mut plus = c.clone();
            plus.set_param(i, c.get_param(i) + scale);
            let mut minus = c.clone();
            minus.set_param(i, c.get_param(i) - scale);
            (component_log_density(&plus, x).unwrap() - component_log_density(&minus, x).unwrap())
                / (2.0 * scale)
        })
    }

    fn finite_diff_hessian(c: &ComponentParams, x: &Observation, h: f64) -> DMatrix<f64> {
        let n = c.param_count();
        DMatrix::from_fn(n, n, |i, j, | {
            let hi = h * (1.0 + c.get_param(i).abs());
            let hj = h * (1.0 + c.get_param(j).abs());
            let eval = |di: f64, dj: f64| {
                let mut p = c.clone();
                p.set_param(i, c.get_param(i) + di);
                p.set_param(j, p.get_param(j) + dj);
                component_log_density(&p, x).unwrap()
            };
            if i == j {
                (eval(hi, 0.0) - 2.0 * eval(0.0, 0.0) + eval(-hi, 0.0)) / (hi * hi)
            } else {
                (eval(hi, hj) - eval(hi, -hj) - eval(-hi, hj) + eval(-hi, -hj)) / (4.0 * hi * hj)
            }
        })
    }

    #[test]
    fn standard_normal_mode() {
        let c = ComponentParams::UnivariateNormal { mu: 0.0, sigma: 1.0 };
        let v = component_log_density(&c, &Observation::Scalar(0.0)).unwrap();
        assert_relative_eq!(v, -0.5 * LN_2PI, epsilon = 1e-12);
        assert_relative_eq!(v, -0.918939, epsilon = 1e-6);
    }

    #[test]
    fn maxwell_boltzmann_matches_arithmetic_oracle() {
        // pdf = sqrt(2/pi) x^2 exp(-x^2 / (2 a^2)) / a^3 evaluated directly
        let c = ComponentParams::MaxwellBoltzmann { a: 1.0 };
        let x = 1.0f64;
        let oracle = ((2.0 / std::f64::consts::PI).sqrt() * x * x * (-x * x / 2.0).exp()).ln();
        let v = component_log_density(&c, &Observation::Scalar(x)).unwrap();
        assert_relative_eq!(v, oracle, epsilon = 1e-12);
    }

    #[test]
    fn maxwell_boltzmann_rejects_nonpositive() {
        let c = ComponentParams::MaxwellBoltzmann { a: 1.0 };
        assert!(component_log_density(&c, &Observation::Scalar(0.0)).is_err());
        assert!(component_log_density(&c, &Observation::Scalar(-1.0)).is_err());
    }

    #[test]
    fn regressor_zero_residual_is_normal_mode() {
        let c = ComponentParams::LinearRegressor {
            beta0: 0.0,
            beta1: 1.0,
            eps: 1.0,
        };
        let v = component_log_density(&c, &Observation::Pair { x: 2.0, y: 2.0 }).unwrap();
        assert_relative_eq!(v, -0.5 * LN_2PI, epsilon = 1e-12);
    }

    #[test]
    fn mixture_density_degenerate_and_average() {
        let same = super::super::tests::two_gaussians(0.3, 0.7, 0.3, 0.7, 0.4);
        let x = Observation::Scalar(1.1);
        let single = component_log_density(same.component(0), &x).unwrap().exp();
        assert_relative_eq!(mixture_density(&same, &x).unwrap(), single, epsilon = 1e-12);

        let m = super::super::tests::two_gaussians(0.0, 1.0, 1.0, 1.0, 0.5);
        let phi_half = (-0.125f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert_relative_eq!(
            mixture_density(&m, &Observation::Scalar(0.5)).unwrap(),
            phi_half,
            epsilon = 1e-9
        );
        assert_relative_eq!(phi_half, 0.352065, epsilon = 1e-6);
    }

    #[test]
    fn univariate_normal_score_oracle() {
        let c = ComponentParams::UnivariateNormal { mu: 0.0, sigma: 1.0 };
        let s = component_score(&c, &Observation::Scalar(1.0)).unwrap();
        assert_relative_eq!(s[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(s[1], 0.0, epsilon = 1e-12);
        let fd = finite_diff_score(&c, &Observation::Scalar(1.0), 1e-6);
        assert_relative_eq!(s[0], fd[0], max_relative = 1e-5, epsilon = 1e-7);
        assert_relative_eq!(s[1], fd[1], max_relative = 1e-5, epsilon = 1e-7);
    }

    #[test]
    fn maxwell_score_closed_form() {
        let c = ComponentParams::MaxwellBoltzmann { a: 1.7 };
        let x = Observation::Scalar(2.3);
        let s = component_score(&c, &x).unwrap();
        let a = 1.7f64;
        assert_relative_eq!(s[0], -3.0 / a + 2.3f64.powi(2) / a.powi(3), epsilon = 1e-12);
        let fd = finite_diff_score(&c, &x, 1e-6);
        assert_relative_eq!(s[0], fd[0], max_relative = 1e-5);
    }

    #[test]
    fn hessians_match_finite_differences_all_families() {
        let cases: Vec<(ComponentParams, Observation)> = vec![
            (
                ComponentParams::UnivariateNormal { mu: 0.4, sigma: 0.8 },
                Observation::Scalar(1.3),
            ),
            (
                ComponentParams::MaxwellBoltzmann { a: 2.1 },
                Observation::Scalar(1.9),
            ),
            (
                ComponentParams::LinearRegressor {
                    beta0: -0.3,
                    beta1: 1.2,
                    eps: 0.7,
                },
                Observation::Pair { x: 0.8, y: 1.1 },
            ),
            (
                ComponentParams::MultivariateNormal {
                    mu: vec![0.2, -0.5],
                    cov: vec![vec![1.1, 0.3], vec![0.3, 0.9]],
                },
                Observation::Vector(vec![0.9, 0.1]),
            ),
        ];
        for (c, x) in cases {
            let h = component_log_density_hessian(&c, &x).unwrap();
            assert_relative_eq!(h.clone(), h.transpose(), epsilon = 1e-12);
            let fd = finite_diff_hessian(&c, &x, 1e-4);
            for i in 0..h.nrows() {
                for j in 0..h.ncols() {
                    assert_relative_eq!(h[(i, j)], fd[(i, j)], max_relative = 1e-4, epsilon = 1e-5);
                }
            }
            let s = component_score(&c, &x).unwrap();
            let fds = finite_diff_score(&c, &x, 1e-6);
            for i in 0..s.len() {
                assert_relative_eq!(s[i], fds[i], max_relative = 1e-5, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn gaussian_hessian_mu_entry() {
        let c = ComponentParams::UnivariateNormal { mu: 3.0, sigma: 2.0 };
        let h = component_log_density_hessian(&c, &Observation::Scalar(-1.0)).unwrap();
        assert_relative_eq!(h[(0, 0)], -0.25, epsilon = 1e-12);
    }

    #[test]
    fn maxwell_hessian_closed_form() {
        let a = 1.3f64;
        let x = 0.9f64;
        let c = ComponentParams::MaxwellBoltzmann { a };
        let h = component_log_density_hessian(&c, &Observation::Scalar(x)).unwrap();
        assert_relative_eq!(h[(0, 0)], 3.0 / (a * a) - 3.0 * x * x / a.powi(4), epsilon = 1e-12);
    }
}
