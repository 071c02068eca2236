//! Acceptance suite: every release criterion as one test printing a
//! PASS/FAIL line. Tolerances are pinned here, not configurable.
//!
//! Run with `cargo test -p ctxmix-cli --test acceptance -- --nocapture`.

use ctxmix_core::estim::{fit, incomplete_loglik, Algorithm, AlgorithmTag, FitConfig};
use ctxmix_core::info::{
    active_layout, complete_info, finite_difference_observed_info, info_at, missing_info,
};
use ctxmix_core::labels::{make_context_labels, make_label, negentropy, ContextMode, ProbLabel};
use ctxmix_core::mixture::{sample_mixture, ComponentParams, MixtureSpec};
use ctxmix_core::params::{ParamLayout, ParamMask};
use ctxmix_core::rng::derive_rng;
use ctxmix_core::scenario::{
    generate_problem, landscape, run_scenario, LandscapeConfig, ScenarioId, ScenarioSpec,
};
use ctxmix_core::speller::{run_speller_study, SimConfig, SpellerAlgorithm, StreamConfig};

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {:<32} {} ({detail})",
        criterion,
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion}: {detail}");
}

fn two_gaussians(mu1: f64, s1: f64, mu2: f64, s2: f64, w1: f64) -> MixtureSpec {
    MixtureSpec::new(
        vec![w1, 1.0 - w1],
        vec![
            ComponentParams::UnivariateNormal { mu: mu1, sigma: s1 },
            ComponentParams::UnivariateNormal { mu: mu2, sigma: s2 },
        ],
    )
    .unwrap()
}

/// 1. The published two-class label has negentropy 0.2, and the constructor
///    reproduces it.
#[test]
fn criterion_01_negentropy_exactness() {
    let ne = negentropy(&ProbLabel::new(vec![0.757, 0.243]).unwrap());
    let label = make_label(0.2, 2, 0).unwrap();
    let ok_ne = (ne - 0.2).abs() <= 1e-3;
    let ok_label =
        (label.probs()[0] - 0.757).abs() <= 1e-3 && (label.probs()[1] - 0.243).abs() <= 1e-3;
    report(
        "01 negentropy exactness",
        ok_ne && ok_label,
        &format!("NE={ne:.6}, label=({:.4}, {:.4})", label.probs()[0], label.probs()[1]),
    );
}

/// 2. One-hot context reduces CA/WCA/DCA to the supervised estimate with
///    unit convergence rate; ignorant context makes WCA's trajectory US's.
#[test]
fn criterion_02_limit_identities() {
    let mut worst_delta = 0.0f64;
    let mut worst_traj = 0.0f64;
    let mut worst_rate = 0.0f64;
    for idx in 0..20 {
        let spec = ScenarioSpec::new(ScenarioId::B, 20, 202);
        let p = generate_problem(&spec, idx).unwrap();
        let cfg = FitConfig::default();
        let layout = ParamLayout::full(&p.init);

        let one_hot: Vec<ProbLabel> =
            p.train.truth.iter().map(|&t| ProbLabel::one_hot(2, t)).collect();
        let s = fit(&Algorithm::Supervised, &p.train, &p.init, &cfg).unwrap();
        for alg in [
            Algorithm::ContextAware(one_hot.clone()),
            Algorithm::WeightedContextAware(one_hot.clone()),
            Algorithm::DirectContextAware(one_hot.clone()),
        ] {
            let r = fit(&alg, &p.train, &p.init, &cfg).unwrap();
            let delta = (layout.pack(&r.spec) - layout.pack(&s.spec)).norm();
            worst_delta = worst_delta.max(delta);
            let info = info_at(&alg, &r.spec, &p.train, &r.responsibilities, None).unwrap();
            worst_rate = worst_rate.max((info.r_prime - 1.0).abs());
        }

        let uniform = vec![ProbLabel::uniform(2); p.train.len()];
        let us = fit(&Algorithm::Unsupervised, &p.train, &p.init, &cfg).unwrap();
        let wca = fit(
            &Algorithm::WeightedContextAware(uniform),
            &p.train,
            &p.init,
            &cfg,
        )
        .unwrap();
        assert_eq!(us.theta_trace.len(), wca.theta_trace.len(), "problem {idx}");
        for (a, b) in us.theta_trace.iter().zip(&wca.theta_trace) {
            worst_traj = worst_traj.max((a - b).norm());
        }
    }
    report(
        "02 limit identities",
        worst_delta < 1e-9 && worst_traj < 1e-12 && worst_rate < 1e-12,
        &format!("max |theta-S|={worst_delta:.2e}, max trajectory gap={worst_traj:.2e}, max |r'-1|={worst_rate:.2e}"),
    );
}

/// 3. Monotone ascent of the estimator's own objective on 200 random
///    problems across all four families.
#[test]
fn criterion_03_monotone_ascent() {
    let mut worst_drop = 0.0f64;
    let mut checked = 0;
    for (scenario, seed) in [
        (ScenarioId::B, 301u64),
        (ScenarioId::D, 302),
        (ScenarioId::E, 303),
        (ScenarioId::F, 304),
    ] {
        for idx in 0..50 {
            let spec = ScenarioSpec::new(scenario, 50, seed);
            let p = match generate_problem(&spec, idx) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let m = p.actual.n_components();
            let labels = make_context_labels(
                &p.train.truth,
                m,
                ContextMode::Correct,
                0.4,
                &mut derive_rng(seed, &[idx as u64, 5]),
            )
            .unwrap();
            let cfg = FitConfig {
                max_iter: 150,
                ..FitConfig::default()
            };
            let layout = ParamLayout::full(&p.init);
            for alg in [
                Algorithm::Unsupervised,
                Algorithm::ContextAware(labels.clone()),
                Algorithm::WeightedContextAware(labels.clone()),
            ] {
                let r = fit(&alg, &p.train, &p.init, &cfg).unwrap();
                let mut prev = f64::NEG_INFINITY;
                for v in &r.theta_trace {
                    let at = layout.unpack(&p.init, v);
                    let l = incomplete_loglik(&alg, &at, &p.train).unwrap();
                    if prev.is_finite() {
                        worst_drop = worst_drop.max(prev - l);
                    }
                    prev = l;
                }
                checked += 1;
            }
        }
    }
    report(
        "03 monotone ascent",
        worst_drop <= 1e-9 && checked >= 3 * 190,
        &format!("worst decrease {worst_drop:.2e} over {checked} fits"),
    );
}

/// 4. The assembled observed information matches the finite-difference
///    negative Hessian of the estimator's objective at converged estimates;
///    CA matches on the weight-free coordinates.
#[test]
fn criterion_04_mip_identity() {
    let mut worst = 0.0f64;
    let mut converged = 0;
    for idx in 0..50 {
        let spec = ScenarioSpec::new(ScenarioId::B, 50, 404);
        let p = match generate_problem(&spec, idx) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let labels = make_context_labels(
            &p.train.truth,
            2,
            ContextMode::Correct,
            0.4,
            &mut derive_rng(404, &[idx as u64, 6]),
        )
        .unwrap();
        let cfg = FitConfig {
            tol: 1e-8,
            max_iter: 2000,
            ..FitConfig::default()
        };
        for alg in [
            Algorithm::Unsupervised,
            Algorithm::ContextAware(labels.clone()),
            Algorithm::WeightedContextAware(labels.clone()),
        ] {
            let r = match fit(&alg, &p.train, &p.init, &cfg) {
                Ok(r) if r.converged => r,
                _ => continue,
            };
            let info = info_at(&alg, &r.spec, &p.train, &r.responsibilities, None).unwrap();
            if !info.regular {
                continue;
            }
            let fd = finite_difference_observed_info(&alg, &r.spec, &p.train, None).unwrap();
            let rel = (&info.i_obs - &fd).norm() / fd.norm();
            worst = worst.max(rel);
            converged += 1;
        }
    }
    report(
        "04 mip identity",
        worst < 1e-3 && converged >= 100,
        &format!("worst relative Frobenius error {worst:.2e} over {converged} converged fits"),
    );
}

/// 5. Missing information decreases strictly with negentropy on the fixed
///    known-deviation problem and vanishes at one-hot labels.
#[test]
fn criterion_05_missing_information_monotone() {
    let actual = two_gaussians(0.0, 1.0, 1.0, 2.0, 0.6);
    let data = sample_mixture(&actual, 10_000, &mut derive_rng(505, &[])).unwrap();
    let mask = ParamMask {
        weights_free: true,
        component_free: vec![vec![true, false], vec![true, false]],
    };
    let grid = [0.0, 0.2, 0.4, 0.6, 0.8, 0.99];
    let mut ok = true;
    let mut detail = String::new();
    for tag in [AlgorithmTag::CA, AlgorithmTag::WCA] {
        let mut prev = f64::INFINITY;
        for &ne in &grid {
            let labels = make_context_labels(
                &data.truth,
                2,
                ContextMode::Correct,
                ne,
                &mut derive_rng(505, &[ctxmix_core::rng::f64_coord(ne)]),
            )
            .unwrap();
            let alg = match tag {
                AlgorithmTag::CA => Algorithm::ContextAware(labels),
                _ => Algorithm::WeightedContextAware(labels),
            };
            let resp = ctxmix_core::estim::e_step(&alg, &actual, &data).unwrap();
            let layout = active_layout(&alg, &actual, Some(&mask));
            let i_m = missing_info(&actual, &data, &resp, &layout).unwrap();
            let tr = i_m.trace();
            if tr >= prev {
                ok = false;
                detail = format!("{tag}: trace rose {prev:.4} -> {tr:.4} at ne {ne}");
            }
            prev = tr;
        }
    }
    // one-hot labels: missing information vanishes against the complete-data
    // scale
    let one_hot: Vec<ProbLabel> =
        data.truth.iter().map(|&t| ProbLabel::one_hot(2, t)).collect();
    let alg = Algorithm::ContextAware(one_hot);
    let resp = ctxmix_core::estim::e_step(&alg, &actual, &data).unwrap();
    let layout = active_layout(&alg, &actual, Some(&mask));
    let i_m = missing_info(&actual, &data, &resp, &layout).unwrap();
    let i_c = complete_info(&actual, &data, &resp, &layout).unwrap();
    if i_m.trace().abs() >= 1e-6 * i_c.trace() {
        ok = false;
        detail = format!("one-hot trace {} vs complete {}", i_m.trace(), i_c.trace());
    }
    if detail.is_empty() {
        detail = "trace strictly decreasing for CA and WCA; zero at one-hot".to_string();
    }
    report("05 missing info monotone", ok, &detail);
}

/// 6. The spectral radius of the rate matrix predicts the measured
///    late-iteration contraction within 0.05.
#[test]
fn criterion_06_convergence_rate_prediction() {
    use rand::Rng;
    let mut rng = derive_rng(606, &[]);
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut radii = Vec::new();
    let mut attempts = 0;
    while checked < 20 && attempts < 200 {
        attempts += 1;
        let sep = rng.gen_range(1.8..3.2);
        let s1 = rng.gen_range(0.6..1.0);
        let s2 = rng.gen_range(0.6..1.0);
        let w1 = rng.gen_range(0.35..0.65);
        let actual = two_gaussians(0.0, s1, sep, s2, w1);
        let data = match sample_mixture(&actual, 2000, &mut rng) {
            Ok(d) => d,
            Err(_) => continue,
        };
        let init = two_gaussians(0.2, 0.9, sep - 0.2, 0.9, 0.5);
        let cfg = FitConfig {
            tol: 1e-10,
            max_iter: 4000,
            ..FitConfig::default()
        };
        let r = match fit(&Algorithm::Unsupervised, &data, &init, &cfg) {
            Ok(r) if r.converged && r.iterations >= 10 => r,
            _ => continue,
        };
        let info = info_at(
            &Algorithm::Unsupervised,
            &r.spec,
            &data,
            &r.responsibilities,
            None,
        )
        .unwrap();
        if !info.regular || !(0.05..0.97).contains(&info.spectral_radius) {
            continue;
        }
        // mean contraction of the last five steps
        let t = r.theta_trace.len();
        let mut ratios = Vec::new();
        for k in (t - 6)..(t - 1) {
            let num = (&r.theta_trace[k + 1] - &r.theta_trace[k]).norm();
            let den = (&r.theta_trace[k] - &r.theta_trace[k - 1]).norm();
            if den > 1e-13 {
                ratios.push(num / den);
            }
        }
        if ratios.len() < 5 {
            continue;
        }
        let measured = ratios.iter().sum::<f64>() / ratios.len() as f64;
        worst = worst.max((measured - info.spectral_radius).abs());
        radii.push(info.spectral_radius);
        checked += 1;
    }
    let lo = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = radii.iter().copied().fold(0.0f64, f64::max);
    report(
        "06 convergence rate prediction",
        checked == 20 && worst < 0.05 && hi - lo > 0.05,
        &format!("worst |measured - predicted| = {worst:.2e} over {checked} problems, radii in [{lo:.3}, {hi:.3}]"),
    );
}

fn scenario_report(id: ScenarioId, seed: u64, grid: &[f64], tweak: impl Fn(&mut ScenarioSpec)) -> ctxmix_core::scenario::ScenarioReport {
    let mut spec = ScenarioSpec::new(id, 100, seed);
    spec.ne_grid = grid.to_vec();
    tweak(&mut spec);
    run_scenario(&spec, &FitConfig::default()).unwrap()
}

/// 7. Desk-scale scenario-b replication: precision ordering, monotone
///    precision in negentropy, CA's rate above WCA's, significance against
///    US.
#[test]
fn criterion_07_scenario_b_replication() {
    let grid = ctxmix_core::scenario::default_ne_grid();
    let report_b = scenario_report(ScenarioId::B, 707, &grid, |_| {});
    let mean_d = |alg: AlgorithmTag, ne: Option<f64>| {
        report_b.mean_of(alg, ne, |r| Some(r.d)).unwrap()
    };
    let d_s = mean_d(AlgorithmTag::S, None);
    let d_us = mean_d(AlgorithmTag::US, None);
    let d_ca03 = mean_d(AlgorithmTag::CA, Some(0.3));
    let ordering = d_s < d_ca03 && d_ca03 < d_us;

    let mut monotone = true;
    for tag in [AlgorithmTag::CA, AlgorithmTag::WCA] {
        let means: Vec<f64> = grid.iter().map(|&ne| mean_d(tag, Some(ne))).collect();
        let inversions = means
            .windows(2)
            .filter(|w| w[1] > w[0] + 1e-12)
            .count();
        if inversions > 1 {
            monotone = false;
        }
    }

    let mut rate_ok = true;
    for &ne in grid.iter().filter(|&&ne| ne < 0.9) {
        let ca = report_b.mean_of(AlgorithmTag::CA, Some(ne), |r| r.r_prime).unwrap();
        let wca = report_b.mean_of(AlgorithmTag::WCA, Some(ne), |r| r.r_prime).unwrap();
        if ca <= wca {
            rate_ok = false;
        }
    }

    // statistical bounding: supervised and unsupervised precision bracket the
    // context-aware estimators at every informative level (small Monte Carlo
    // allowances)
    let mut bounded = true;
    for &ne in grid.iter().filter(|&&ne| ne >= 0.1) {
        for tag in [AlgorithmTag::CA, AlgorithmTag::WCA] {
            let d = mean_d(tag, Some(ne));
            if d > d_us * 1.05 || d_s > d + 0.05 * d_us {
                bounded = false;
            }
        }
    }

    let sig = report_b
        .significance_for("d", AlgorithmTag::CA, Some(0.3), AlgorithmTag::US, None)
        .unwrap();
    report(
        "07 scenario b replication",
        ordering && monotone && rate_ok && bounded && sig.p_value < 0.01,
        &format!(
            "D(S)={d_s:.3} < D(CA,0.3)={d_ca03:.3} < D(US)={d_us:.3}; monotone={monotone}; CA rate > WCA rate={rate_ok}; bounded={bounded}; p={:.2e}",
            sig.p_value
        ),
    );
}

/// 8. Misleading context inverts classification when dominant and still
///    helps when rare.
#[test]
fn criterion_08_wrong_context() {
    let inverted = scenario_report(ScenarioId::Wrong, 808, &[0.9], |s| s.wrong_frac = 0.9);
    let mut acc_inverted = 0.0;
    let mut count = 0.0;
    for tag in [AlgorithmTag::CA, AlgorithmTag::WCA, AlgorithmTag::DCA] {
        if let Some(a) = inverted.mean_of(tag, Some(0.9), |r| r.acc) {
            acc_inverted += a;
            count += 1.0;
        }
    }
    acc_inverted /= count;

    let mild = scenario_report(ScenarioId::Wrong, 809, &[0.3], |s| s.wrong_frac = 0.2);
    let d_ca = mild.mean_of(AlgorithmTag::CA, Some(0.3), |r| Some(r.d)).unwrap();
    let d_us = mild.mean_of(AlgorithmTag::US, None, |r| Some(r.d)).unwrap();
    let sig = mild
        .significance_for("d", AlgorithmTag::CA, Some(0.3), AlgorithmTag::US, None)
        .unwrap();
    report(
        "08 wrong context",
        acc_inverted < 0.5 && d_ca < d_us && sig.p_value < 0.01,
        &format!(
            "mean acc at 90% wrong = {acc_inverted:.3}; D(CA)={d_ca:.3} < D(US)={d_us:.3}, p={:.2e}",
            sig.p_value
        ),
    );
}

/// 9. Context removes most of the class bias of unbalanced estimation.
#[test]
fn criterion_09_bias_alleviation() {
    let report_biased = scenario_report(ScenarioId::Biased, 909, &[0.3], |s| s.pi1 = 0.2);
    let b_us = report_biased
        .mean_of(AlgorithmTag::US, None, |r| r.bias_b)
        .unwrap();
    let b_ca = report_biased
        .mean_of(AlgorithmTag::CA, Some(0.3), |r| r.bias_b)
        .unwrap();
    report(
        "09 bias alleviation",
        b_ca.abs() < 0.5 * b_us.abs(),
        &format!("|B(CA,0.3)|={:.4} vs |B(US)|={:.4}", b_ca.abs(), b_us.abs()),
    );
}

/// 10. Landscape: ignorant WCA is a vertical translation of US; every
///     first-iteration bound is tangent at the initial point and never
///     exceeds its objective.
#[test]
fn criterion_10_landscape() {
    let cfg = LandscapeConfig {
        ne_set: vec![0.0, 0.7],
        ..LandscapeConfig::default()
    };
    let points = landscape(&cfg).unwrap();

    let curve = |name: &str, ne: Option<f64>| -> Vec<&ctxmix_core::scenario::LandscapePoint> {
        points
            .iter()
            .filter(|p| {
                p.curve == name
                    && match (ne, p.ne) {
                        (None, _) => true,
                        (Some(a), Some(b)) => (a - b).abs() < 1e-12,
                        _ => false,
                    }
            })
            .collect()
    };

    let us = curve("US", None);
    let wca0 = curve("WCA", Some(0.0));
    let offsets: Vec<f64> = us
        .iter()
        .zip(&wca0)
        .map(|(u, w)| w.loglik - u.loglik)
        .collect();
    let mean_off = offsets.iter().sum::<f64>() / offsets.len() as f64;
    let max_dev = offsets
        .iter()
        .map(|o| (o - mean_off).abs())
        .fold(0.0, f64::max);

    // lower-bound property across the 400-point grid
    let mut bound_ok = true;
    for p in &points {
        if p.curve != "DCA" {
            if let Some(qh) = p.q_plus_h {
                if qh > p.loglik + 1e-9 {
                    bound_ok = false;
                }
            }
        }
    }

    // tangency exactly at the initial point
    let at_init = landscape(&LandscapeConfig {
        grid_start: 2.0,
        grid_end: 3.0,
        grid_points: 2,
        ne_set: vec![0.0, 0.7],
        ..LandscapeConfig::default()
    })
    .unwrap();
    let mut tangent_ok = true;
    let mut worst_gap = 0.0f64;
    for p in at_init.iter().filter(|p| p.mu1 == 2.0 && p.curve != "DCA") {
        let gap = (p.q_plus_h.unwrap() - p.loglik).abs();
        worst_gap = worst_gap.max(gap);
        if gap > 1e-9 {
            tangent_ok = false;
        }
    }

    report(
        "10 landscape",
        max_dev < 1e-9 && bound_ok && tangent_ok,
        &format!("translation deviation {max_dev:.2e}; tangency gap {worst_gap:.2e}; bound holds={bound_ok}"),
    );
}

/// 11. Speller direction check on the default drifting stream.
#[test]
fn criterion_11_speller_direction() {
    let words = vec!["nothing".to_string(), "portion".to_string()];
    let algs = [
        SpellerAlgorithm::Supervised,
        SpellerAlgorithm::ContextAware,
        SpellerAlgorithm::IgnorantContext,
    ];
    let rows = run_speller_study(
        12,
        &words,
        &algs,
        &StreamConfig::default(),
        &SimConfig::default(),
        2026,
    )
    .unwrap();
    let across = |alg: SpellerAlgorithm| -> f64 {
        let mut subject_means = Vec::new();
        for s in 0..12 {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| r.subject == s && r.algorithm == alg)
                .map(|r| r.running_ba)
                .collect();
            subject_means.push(v.iter().sum::<f64>() / v.len().max(1) as f64);
        }
        subject_means.iter().sum::<f64>() / subject_means.len() as f64
    };
    let s = across(SpellerAlgorithm::Supervised);
    let ca = across(SpellerAlgorithm::ContextAware);
    let cae = across(SpellerAlgorithm::IgnorantContext);
    // margin check: context-aware adaptation stays close to supervised
    let margin = 0.05;
    report(
        "11 speller direction",
        s + 1e-9 >= ca && ca > cae && ca - cae >= 0.05 && ca >= s - margin,
        &format!(
            "S={s:.3} >= CA={ca:.3} > CAE={cae:.3}; CA-CAE={:.3}, S-CA={:.3}",
            ca - cae,
            s - ca
        ),
    );
}

/// 12. Byte-identical CLI output for a fixed seed, for every subcommand.
#[test]
fn criterion_12_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_ctxmix");
    let dir = std::env::temp_dir().join(format!("ctxmix-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let run = |args: &[&str]| {
        let out = std::process::Command::new(bin)
            .args(args)
            .output()
            .expect("cli runs");
        assert!(
            out.status.success(),
            "cli failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    let mut all_ok = true;
    let mut detail = String::new();
    let cases: Vec<(&str, Vec<String>, Vec<&str>)> = vec![
        (
            "scenario",
            vec![
                "scenario", "--id", "b", "--problems", "3", "--ne-grid", "0,0.5", "--seed", "9",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
            vec!["s.csv", "s.agg.csv", "s.sig.csv"],
        ),
        (
            "landscape",
            vec![
                "landscape", "--grid-points", "40", "--n", "60", "--seed", "3",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
            vec!["l.csv"],
        ),
        (
            "mip",
            vec![
                "mip", "--reps", "2", "--n", "400", "--ne-grid", "0,0.8", "--seed", "4",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
            vec!["m.csv"],
        ),
        (
            "speller",
            vec![
                "speller", "--words", "note", "--subjects", "2", "--stream-len", "1500",
                "--seed", "5",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
            vec!["p.csv"],
        ),
    ];
    for (name, args, outputs) in cases {
        let out_a = dir.join(format!("{name}-a.csv"));
        let out_b = dir.join(format!("{name}-b.csv"));
        let mut args_a: Vec<String> = args.clone();
        args_a.push("--out".into());
        args_a.push(out_a.to_string_lossy().into_owned());
        let mut args_b: Vec<String> = args;
        args_b.push("--out".into());
        args_b.push(out_b.to_string_lossy().into_owned());
        run(&args_a.iter().map(String::as_str).collect::<Vec<_>>());
        run(&args_b.iter().map(String::as_str).collect::<Vec<_>>());
        for suffix in outputs {
            let read = |base: &std::path::Path| -> Vec<u8> {
                let path = if suffix.contains("agg") {
                    base.with_file_name(
                        base.file_stem().unwrap().to_string_lossy().to_string() + ".agg.csv",
                    )
                } else if suffix.contains("sig") {
                    base.with_file_name(
                        base.file_stem().unwrap().to_string_lossy().to_string() + ".sig.csv",
                    )
                } else {
                    base.to_path_buf()
                };
                std::fs::read(path).unwrap()
            };
            let a = read(&out_a);
            let b = read(&out_b);
            if a != b || a.is_empty() {
                all_ok = false;
                detail = format!("{name} {suffix} differs or empty");
            }
        }
    }
    std::fs::remove_dir_all(&dir).ok();
    if detail.is_empty() {
        detail = "all four subcommands byte-identical across reruns".to_string();
    }
    report("12 cli determinism", all_ok, &detail);
}
