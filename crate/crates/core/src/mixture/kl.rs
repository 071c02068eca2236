//! Closed-form Kullback-Leibler divergences between same-family components and
//! the bracketed root solve used to generate problems at a target separability.

use super::{ComponentParams, Family};
use crate::error::{Error, Result};
use nalgebra::DVector;
use rand::Rng;

/// KL(a || b) for two components of the same family.
///
/// Regressors are unsupported: problem generation imposes no separability on
/// them.
pub fn component_kl(a: &ComponentParams, b: &ComponentParams) -> Result<f64> {
    if a.family() != b.family() || a.dim() != b.dim() {
        return Err(Error::FamilyMismatch);
    }
    match (a, b) {
        (
            ComponentParams::UnivariateNormal { mu: m1, sigma: s1 },
            ComponentParams::UnivariateNormal { mu: m2, sigma: s2 },
        ) => Ok((s2 / s1).ln() + (s1 * s1 + (m1 - m2) * (m1 - m2)) / (2.0 * s2 * s2) - 0.5),
        (
            ComponentParams::MultivariateNormal { mu: m1, .. },
            ComponentParams::MultivariateNormal { mu: m2, .. },
        ) => {
            let d = m1.len() as f64;
            let c1 = a.cov_matrix().unwrap();
            let c2 = b.cov_matrix().unwrap();
            let chol2 = nalgebra::Cholesky::new(c2).ok_or(Error::SingularCovariance)?;
            let chol1 = nalgebra::Cholesky::new(c1.clone()).ok_or(Error::SingularCovariance)?;
            let p2 = chol2.inverse();
            let logdet1 = 2.0 * chol1.l().diagonal().map(f64::ln).sum();
            let logdet2 = 2.0 * chol2.l().diagonal().map(f64::ln).sum();
            let diff = DVector::from_column_slice(m2) - DVector::from_column_slice(m1);
            let quad = (&p2 * &diff).dot(&diff);
            Ok(0.5 * ((&p2 * c1).trace() + quad - d + logdet2 - logdet1))
        }
        (
            ComponentParams::MaxwellBoltzmann { a: a1 },
            ComponentParams::MaxwellBoltzmann { a: a2 },
        ) => Ok(3.0 * (a2 / a1).ln() + 1.5 * (a1 * a1 / (a2 * a2) - 1.0)),
        (ComponentParams::LinearRegressor { .. }, _) => {
            Err(Error::UnsupportedFamily("linear regressors"))
        }
        _ => Err(Error::FamilyMismatch),
    }
}

/// Direction of the divergence constrained by [`solve_param_for_kl`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KlDirection {
    /// KL(new || fixed), the default.
    #[default]
    NewFromFixed,
    /// KL(fixed || new).
    FixedFromNew,
}

/// Which parameter of the candidate component the solver is free to move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FreeAxis {
    /// Univariate mean, or the multivariate mean along a random unit
    /// direction anchored at the fixed component's mean.
    Mean,
    /// Maxwell-Boltzmann scale.
    Scale,
}

const BRACKET_EXPANSIONS: usize = 64;
const KL_TOL: f64 = 1e-10;

/// Solves for the one remaining parameter of `template` so that the divergence
/// between the resulting component and `fixed` equals `target_kl`.
///
/// All other parameters of `template` must already be drawn. When two roots
/// exist (mean above/below, scale above/below), one side is chosen uniformly
/// at random.
pub fn solve_param_for_kl(
    fixed: &ComponentParams,
    template: &ComponentParams,
    target_kl: f64,
    free_axis: FreeAxis,
    direction: KlDirection,
    rng: &mut impl Rng,
) -> Result<ComponentParams> {
    if !(target_kl > 0.0) {
        return Err(Error::InvalidParameter {
            name: "target_kl",
            reason: format!("must be > 0, got {target_kl}"),
        });
    }
    if fixed.family() != template.family() || fixed.dim() != template.dim() {
        return Err(Error::FamilyMismatch);
    }
    let kl_of = |candidate: &ComponentParams| -> Result<f64> {
        match direction {
            KlDirection::NewFromFixed => component_kl(candidate, fixed),
            KlDirection::FixedFromNew => component_kl(fixed, candidate),
        }
    };

    match (free_axis, fixed.family()) {
        (FreeAxis::Mean, Family::UnivariateNormal) => {
            let anchor = match fixed {
                ComponentParams::UnivariateNormal { mu, .. } => *mu,
                _ => unreachable!(),
            };
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let candidate_at = |t: f64| {
                let mut c = template.clone();
                c.set_param(0, anchor + sign * t);
                c
            };
            let t = solve_monotone_offset(&|t| kl_of(&candidate_at(t)), target_kl)?;
            Ok(candidate_at(t))
        }
        (FreeAxis::Mean, Family::MultivariateNormal) => {
            let anchor = match fixed {
                ComponentParams::MultivariateNormal { mu, .. } => DVector::from_column_slice(mu),
                _ => unreachable!(),
            };
            let d = anchor.len();
            let dir = random_unit_vector(d, rng);
            let candidate_at = |t: f64| {
                let mut c = template.clone();
                for i in 0..d {
                    c.set_param(i, anchor[i] + t * dir[i]);
                }
                c
            };
            let t = solve_monotone_offset(&|t| kl_of(&candidate_at(t)), target_kl)?;
            Ok(candidate_at(t))
        }
        (FreeAxis::Scale, Family::MaxwellBoltzmann) => {
            let anchor = match fixed {
                ComponentParams::MaxwellBoltzmann { a } => *a,
                _ => unreachable!(),
            };
            let upper = rng.gen::<bool>();
            let candidate_at = |a: f64| ComponentParams::MaxwellBoltzmann { a };
            let a = if upper {
                solve_monotone_offset(&|t| kl_of(&candidate_at(anchor + t)), target_kl)
                    .map(|t| anchor + t)?
            } else {
                // lower branch: KL decreases towards 0 as a -> anchor from below
                solve_monotone_offset(
                    &|t| kl_of(&candidate_at(anchor / (1.0 + t))),
                    target_kl,
                )
                .map(|t| anchor / (1.0 + t))?
            };
            Ok(candidate_at(a))
        }
        (axis, family) => Err(Error::InvalidParameter {
            name: "free_axis",
            reason: format!("{axis:?} is not solvable for family {family:?}"),
        }),
    }
}

/// Bisection on a function of a nonnegative offset `t` that is monotone
/// increasing with `f(0) <= target`; the bracket is expanded geometrically.
fn solve_monotone_offset(f: &dyn Fn(f64) -> Result<f64>, target: f64) -> Result<f64> {
    let at_zero = f(0.0)?;
    if at_zero > target {
        return Err(Error::NoRoot);
    }
    if (at_zero - target).abs() <= KL_TOL {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    let mut expansions = 0;
    while f(hi)? < target {
        hi *= 2.0;
        expansions += 1;
        if expansions > BRACKET_EXPANSIONS {
            return Err(Error::NoRoot);
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if (v - target).abs() <= KL_TOL || (hi - lo) < 1e-15 * (1.0 + hi) {
            return Ok(mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn random_unit_vector(d: usize, rng: &mut impl Rng) -> DVector<f64> {
    use rand_distr::StandardNormal;
    loop {
        let v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}
