//! Running problems across estimators and negentropy levels, aggregating and
//! testing significance.

use super::generate::generate_problem;
use super::metrics::{balanced_accuracy, class_bias, param_distance, plain_accuracy, regression_mse};
use super::stats::wilcoxon_ranksum;
use super::{
    AggregateRow, ProblemInstance, ResultRow, ScenarioId, ScenarioReport, ScenarioSpec,
    SignificanceRow,
};
use crate::error::Result;
use crate::estim::{classify_map, fit, Algorithm, AlgorithmTag, FitConfig};
use crate::info::{active_layout, complete_info, info_at, mip_assemble};
use crate::labels::{make_context_labels, negentropy, ContextMode, ProbLabel};
use crate::mixture::Family;
use crate::rng::{derive_rng, f64_coord};
use nalgebra::DMatrix;
use rayon::prelude::*;

const LABEL_STREAM: u64 = 0x1a;
const SIGNIFICANCE_LEVEL: f64 = 0.01;

fn label_mode(spec: &ScenarioSpec) -> ContextMode {
    match spec.id {
        ScenarioId::Wrong => ContextMode::Wrong {
            frac: spec.wrong_frac,
        },
        ScenarioId::Mixed => ContextMode::Mixed {
            ne_low: 0.0,
            ne_high: 0.5,
        },
        _ => ContextMode::Correct,
    }
}

/// Labels for one (problem, ne) cell; all context-aware estimators at the
/// same level share them.
fn labels_for(
    spec: &ScenarioSpec,
    idx: usize,
    ne: f64,
    truth: &[usize],
    m: usize,
) -> Result<Vec<ProbLabel>> {
    let mut rng = derive_rng(
        spec.master_seed,
        &[LABEL_STREAM, spec.id.code(), idx as u64, f64_coord(ne)],
    );
    make_context_labels(truth, m, label_mode(spec), ne, &mut rng)
}

/// Runs one estimation problem for US, S and the context-aware estimators
/// over the negentropy grid, producing one result row each.
pub fn run_problem(
    spec: &ScenarioSpec,
    idx: usize,
    problem: &ProblemInstance,
    config: &FitConfig,
) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    let cfg = FitConfig {
        mask: Some(problem.mask.clone()),
        ..config.clone()
    };

    rows.push(evaluate(spec, idx, problem, &Algorithm::Unsupervised, None, &cfg)?);
    rows.push(evaluate(spec, idx, problem, &Algorithm::Supervised, None, &cfg)?);

    let m = problem.actual.n_components();
    if spec.id.uses_ne_grid() {
        for &ne in &spec.ne_grid {
            let labels = labels_for(spec, idx, ne, &problem.train.truth, m)?;
            for tag in [AlgorithmTag::CA, AlgorithmTag::WCA, AlgorithmTag::DCA] {
                let alg = with_labels(tag, labels.clone());
                rows.push(evaluate(spec, idx, problem, &alg, Some(ne), &cfg)?);
            }
        }
    } else {
        let labels = labels_for(spec, idx, 0.25, &problem.train.truth, m)?;
        let mean_ne =
            labels.iter().map(negentropy).sum::<f64>() / labels.len().max(1) as f64;
        for tag in [AlgorithmTag::CA, AlgorithmTag::WCA, AlgorithmTag::DCA] {
            let alg = with_labels(tag, labels.clone());
            rows.push(evaluate(spec, idx, problem, &alg, Some(mean_ne), &cfg)?);
        }
    }
    Ok(rows)
}

fn with_labels(tag: AlgorithmTag, labels: Vec<ProbLabel>) -> Algorithm {
    match tag {
        AlgorithmTag::CA => Algorithm::ContextAware(labels),
        AlgorithmTag::WCA => Algorithm::WeightedContextAware(labels),
        AlgorithmTag::DCA => Algorithm::DirectContextAware(labels),
        _ => unreachable!("context-free estimators carry no labels"),
    }
}

fn evaluate(
    spec: &ScenarioSpec,
    idx: usize,
    problem: &ProblemInstance,
    alg: &Algorithm,
    ne: Option<f64>,
    cfg: &FitConfig,
) -> Result<ResultRow> {
    let r = fit(alg, &problem.train, &problem.init, cfg)?;
    let d = param_distance(&r.spec, &problem.actual, &problem.mask);

    // information analysis: non-iterative estimators see no missing
    // information, so their rate is 1 and their errors come from the
    // complete-data matrix alone
    let (ase, r_prime, spectral_ge_one, regular) = match alg.tag() {
        AlgorithmTag::S | AlgorithmTag::DCA => {
            let layout = active_layout(alg, &r.spec, Some(&problem.mask));
            let i_c = complete_info(&r.spec, &problem.train, &r.responsibilities, &layout)?;
            let w = layout.len();
            let info = mip_assemble(i_c, DMatrix::zeros(w, w), layout.names(&r.spec), false)?;
            let ase = info.regular.then(|| info.se.mean());
            (ase, Some(1.0), false, info.regular)
        }
        _ => {
            let info = info_at(alg, &r.spec, &problem.train, &r.responsibilities, Some(&problem.mask))?;
            if info.regular {
                (
                    Some(info.se.mean()),
                    Some(info.r_prime),
                    info.spectral_radius >= 1.0,
                    true,
                )
            } else {
                (None, None, false, false)
            }
        }
    };

    let (acc, ba, mse) = if problem.actual.family() == Family::LinearRegressor {
        (None, None, Some(regression_mse(&r.spec, &problem.test)?))
    } else {
        let pred = classify_map(&r.spec, &problem.test)?;
        let acc = plain_accuracy(&pred, &problem.test.truth);
        let ba = balanced_accuracy(
            &pred,
            &problem.test.truth,
            problem.actual.n_components(),
        );
        (Some(acc), Some(ba), None)
    };

    let bias_b = (spec.id == ScenarioId::Biased)
        .then(|| class_bias(&r.spec, &problem.actual, &problem.mask));

    Ok(ResultRow {
        scenario: spec.id.name(),
        problem_id: idx,
        algorithm: alg.tag(),
        ne,
        converged: r.converged,
        iterations: r.iterations,
        d,
        ase,
        r_prime,
        acc,
        ba,
        mse,
        bias_b,
        seed: spec.master_seed,
        spectral_ge_one,
        regular,
    })
}

/// Runs the whole scenario: generation, per-problem runs in parallel,
/// aggregation and pairwise significance tests. Per-problem failures are
/// counted, never fatal.
pub fn run_scenario(spec: &ScenarioSpec, config: &FitConfig) -> Result<ScenarioReport> {
    spec.validate()?;
    let outcomes: Vec<(usize, Option<(usize, Vec<ResultRow>)>)> = (0..spec.problems)
        .into_par_iter()
        .map(|idx| match generate_problem(spec, idx) {
            Ok(problem) => match run_problem(spec, idx, &problem, config) {
                Ok(rows) => (idx, Some((problem.retries, rows))),
                Err(_) => (idx, None),
            },
            Err(_) => (idx, None),
        })
        .collect();

    let mut rows = Vec::new();
    let mut generation_failures = 0;
    let mut generation_retries = 0;
    for (_, outcome) in outcomes {
        match outcome {
            Some((retries, mut problem_rows)) => {
                generation_retries += retries;
                rows.append(&mut problem_rows);
            }
            None => generation_failures += 1,
        }
    }

    let aggregates = aggregate(spec, &rows);
    let significance = significance_table(spec, &rows);
    Ok(ScenarioReport {
        spec: spec.clone(),
        rows,
        aggregates,
        significance,
        generation_failures,
        generation_retries,
    })
}

type Cell = (AlgorithmTag, Option<u64>);

/// Aggregation key. Mixed-context rows keep their per-problem mean
/// negentropy in the table but pool into one cell per estimator, since the
/// per-sample levels are random.
fn cell_of(spec: &ScenarioSpec, row: &ResultRow) -> Cell {
    if spec.id.uses_ne_grid() {
        (row.algorithm, row.ne.map(f64_coord))
    } else {
        (row.algorithm, None)
    }
}

fn cells_in_order(spec: &ScenarioSpec, rows: &[ResultRow]) -> Vec<Cell> {
    let mut cells: Vec<Cell> = Vec::new();
    for tag in [
        AlgorithmTag::US,
        AlgorithmTag::S,
        AlgorithmTag::CA,
        AlgorithmTag::WCA,
        AlgorithmTag::DCA,
    ] {
        let mut nes: Vec<Option<u64>> = rows
            .iter()
            .filter(|r| r.algorithm == tag)
            .map(|r| cell_of(spec, r).1)
            .collect();
        nes.sort_by(|a, b| {
            let fa = a.map(f64::from_bits).unwrap_or(-1.0);
            let fb = b.map(f64::from_bits).unwrap_or(-1.0);
            fa.total_cmp(&fb)
        });
        nes.dedup();
        for ne in nes {
            cells.push((tag, ne));
        }
    }
    cells
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn aggregate(spec: &ScenarioSpec, rows: &[ResultRow]) -> Vec<AggregateRow> {
    let mut out = Vec::new();
    for cell in cells_in_order(spec, rows) {
        let cell_rows: Vec<&ResultRow> = rows
            .iter()
            .filter(|r| cell_of(spec, r) == cell)
            .collect();
        if cell_rows.is_empty() {
            continue;
        }
        let collect = |f: &dyn Fn(&ResultRow) -> Option<f64>| -> Vec<f64> {
            cell_rows.iter().filter_map(|r| f(r)).collect()
        };
        let optional_stats = |f: &dyn Fn(&ResultRow) -> Option<f64>| -> (Option<f64>, Option<f64>) {
            let v = collect(f);
            if v.is_empty() {
                (None, None)
            } else {
                let (m, s) = mean_std(&v);
                (Some(m), Some(s))
            }
        };
        let d_vals: Vec<f64> = cell_rows.iter().map(|r| r.d).collect();
        let (d_mean, d_std) = mean_std(&d_vals);
        let (ase_mean, ase_std) = optional_stats(&|r| r.ase);
        let (rp_mean, rp_std) = optional_stats(&|r| r.r_prime);
        let (acc_mean, acc_std) = optional_stats(&|r| r.acc);
        let (ba_mean, ba_std) = optional_stats(&|r| r.ba);
        let (mse_mean, mse_std) = optional_stats(&|r| r.mse);
        let (bias_mean, bias_std) = optional_stats(&|r| r.bias_b);
        out.push(AggregateRow {
            scenario: spec.id.name(),
            algorithm: cell.0,
            ne: cell.1.map(f64::from_bits),
            n: cell_rows.len(),
            n_unconverged: cell_rows.iter().filter(|r| !r.converged).count(),
            n_spectral_ge_one: cell_rows.iter().filter(|r| r.spectral_ge_one).count(),
            n_nonregular: cell_rows.iter().filter(|r| !r.regular).count(),
            d_mean,
            d_std,
            ase_mean,
            ase_std,
            r_prime_mean: rp_mean,
            r_prime_std: rp_std,
            acc_mean,
            acc_std,
            ba_mean,
            ba_std,
            mse_mean,
            mse_std,
            bias_mean,
            bias_std,
        });
    }
    out
}

const METRICS: &[(&str, fn(&ResultRow) -> Option<f64>)] = &[
    ("d", |r| Some(r.d)),
    ("ase", |r| r.ase),
    ("r_prime", |r| r.r_prime),
    ("acc", |r| r.acc),
    ("ba", |r| r.ba),
    ("mse", |r| r.mse),
    ("bias_b", |r| r.bias_b),
];

/// Every context-aware cell against US and S, plus CA/WCA/DCA against each
/// other at matching negentropy, for each metric with data on both sides.
fn significance_table(spec: &ScenarioSpec, rows: &[ResultRow]) -> Vec<SignificanceRow> {
    let mut out = Vec::new();
    let cells = cells_in_order(spec, rows);
    let values = |cell: &Cell, f: fn(&ResultRow) -> Option<f64>| -> Vec<f64> {
        rows.iter()
            .filter(|r| cell_of(spec, r) == *cell)
            .filter_map(f)
            .collect()
    };
    let mut push = |a: &Cell, b: &Cell| {
        for (name, f) in METRICS {
            let va = values(a, *f);
            let vb = values(b, *f);
            if va.is_empty() || vb.is_empty() {
                continue;
            }
            let p = wilcoxon_ranksum(&va, &vb);
            out.push(SignificanceRow {
                metric: name,
                alg_a: a.0,
                ne_a: a.1.map(f64::from_bits),
                alg_b: b.0,
                ne_b: b.1.map(f64::from_bits),
                p_value: p,
                significant: p < SIGNIFICANCE_LEVEL,
            });
        }
    };
    let context_aware = [AlgorithmTag::CA, AlgorithmTag::WCA, AlgorithmTag::DCA];
    for cell in &cells {
        if context_aware.contains(&cell.0) {
            push(cell, &(AlgorithmTag::US, None));
            push(cell, &(AlgorithmTag::S, None));
        }
    }
    for cell in &cells {
        if cell.0 == AlgorithmTag::CA {
            push(cell, &(AlgorithmTag::WCA, cell.1));
            push(cell, &(AlgorithmTag::DCA, cell.1));
        }
        if cell.0 == AlgorithmTag::WCA {
            push(cell, &(AlgorithmTag::DCA, cell.1));
        }
    }
    out
}
