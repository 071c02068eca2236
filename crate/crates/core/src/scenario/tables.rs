//! Table output: the fixed CSV schemas and the JSON document form.

use super::{LandscapePoint, MipAggregate, ScenarioReport};
use std::fmt::Write as _;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Result rows, one line per (problem, estimator, ne).
///
/// Header: `scenario,problem_id,algorithm,ne,converged,iterations,D,ASE,
/// r_prime,acc,ba,mse,bias_b,seed`; metric cells that do not apply stay
/// empty.
pub fn rows_csv(report: &ScenarioReport) -> String {
    let mut out = String::from(
        "scenario,problem_id,algorithm,ne,converged,iterations,D,ASE,r_prime,acc,ba,mse,bias_b,seed\n",
    );
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.problem_id,
            r.algorithm,
            opt(r.ne),
            r.converged,
            r.iterations,
            r.d,
            opt(r.ase),
            opt(r.r_prime),
            opt(r.acc),
            opt(r.ba),
            opt(r.mse),
            opt(r.bias_b),
            r.seed,
        )
        .unwrap();
    }
    out
}

/// Per-cell aggregates, one line per (algorithm, ne).
pub fn aggregates_csv(report: &ScenarioReport) -> String {
    let mut out = String::from(
        "scenario,algorithm,ne,n,n_unconverged,n_spectral_ge_one,n_nonregular,\
         d_mean,d_std,ase_mean,ase_std,r_prime_mean,r_prime_std,acc_mean,acc_std,\
         ba_mean,ba_std,mse_mean,mse_std,bias_mean,bias_std\n",
    );
    for a in &report.aggregates {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            a.scenario,
            a.algorithm,
            opt(a.ne),
            a.n,
            a.n_unconverged,
            a.n_spectral_ge_one,
            a.n_nonregular,
            a.d_mean,
            a.d_std,
            opt(a.ase_mean),
            opt(a.ase_std),
            opt(a.r_prime_mean),
            opt(a.r_prime_std),
            opt(a.acc_mean),
            opt(a.acc_std),
            opt(a.ba_mean),
            opt(a.ba_std),
            opt(a.mse_mean),
            opt(a.mse_std),
            opt(a.bias_mean),
            opt(a.bias_std),
        )
        .unwrap();
    }
    out
}

/// Pairwise Wilcoxon comparisons.
pub fn significance_csv(report: &ScenarioReport) -> String {
    let mut out = String::from("scenario,metric,alg_a,ne_a,alg_b,ne_b,p_value,significant\n");
    for s in &report.significance {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            report.spec.id.name(),
            s.metric,
            s.alg_a,
            opt(s.ne_a),
            s.alg_b,
            opt(s.ne_b),
            s.p_value,
            s.significant,
        )
        .unwrap();
    }
    out
}

/// The whole report as one JSON document.
pub fn report_json(report: &ScenarioReport) -> String {
    serde_json::to_string_pretty(report).expect("serializable report")
}

/// Landscape curves: `curve,ne,mu1,loglik,q_plus_h,mu1_hat,mu1_first`.
pub fn landscape_csv(points: &[LandscapePoint]) -> String {
    let mut out = String::from("curve,ne,mu1,loglik,q_plus_h,mu1_hat,mu1_first\n");
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.curve,
            opt(p.ne),
            p.mu1,
            p.loglik,
            opt(p.q_plus_h),
            p.mu1_hat,
            p.mu1_first,
        )
        .unwrap();
    }
    out
}

/// Standard-error study table:
/// `algorithm,ne,se_pi1,se_mu1,se_mu2,se_sum,r_prime,reps_used,reps_excluded`.
pub fn mip_csv(rows: &[MipAggregate]) -> String {
    let mut out =
        String::from("algorithm,ne,se_pi1,se_mu1,se_mu2,se_sum,r_prime,reps_used,reps_excluded\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.algorithm,
            opt(r.ne),
            opt(r.se_pi1),
            opt(r.se_mu1),
            opt(r.se_mu2),
            opt(r.se_sum),
            opt(r.r_prime),
            r.reps_used,
            r.reps_excluded,
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{run_scenario, ScenarioId, ScenarioSpec};
    use super::*;
    use crate::estim::FitConfig;

    #[test]
    fn csv_headers_and_reproducibility() {
        let mut spec = ScenarioSpec::new(ScenarioId::B, 2, 11);
        spec.ne_grid = vec![0.3];
        let a = run_scenario(&spec, &FitConfig::default()).unwrap();
        let b = run_scenario(&spec, &FitConfig::default()).unwrap();
        assert_eq!(rows_csv(&a), rows_csv(&b));
        assert_eq!(aggregates_csv(&a), aggregates_csv(&b));
        assert_eq!(significance_csv(&a), significance_csv(&b));
        let first = rows_csv(&a);
        let mut lines = first.lines();
        assert_eq!(
            lines.next().unwrap(),
            "scenario,problem_id,algorithm,ne,converged,iterations,D,ASE,r_prime,acc,ba,mse,bias_b,seed"
        );
        // 2 problems x (2 + 3)
        assert_eq!(first.lines().count() - 1, 2 * 5);
    }
}
