//! The closed typing loop: tree navigation driven by played-back feature
//! samples, command accumulation, automatic error correction, and running
//! balanced accuracy for the supervised, context-aware and ignorant-context
//! learners.

use super::lm::{symbol_of, CharLm, ALPHABET_SIZE};
use super::online::{OnlineBuffer, OnlineConfig};
use super::stream::{synth_stream, StreamConfig, SubjectStream, FEATURE_DIM};
use super::tree::{build_tree, context_label_at_node, Side};
use crate::error::{Error, Result};
use crate::labels::ProbLabel;
use crate::rng::derive_rng;
use crate::scenario::balanced_accuracy;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// The three online learners compared by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpellerAlgorithm {
    /// True labels (supervised sliding-window LDA).
    Supervised,
    /// Tree-derived contextual labels.
    ContextAware,
    /// Uniform labels: context-aware learning with ignorant context.
    IgnorantContext,
}

impl SpellerAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            SpellerAlgorithm::Supervised => "S",
            SpellerAlgorithm::ContextAware => "CA",
            SpellerAlgorithm::IgnorantContext => "CAE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "S" => Some(SpellerAlgorithm::Supervised),
            "CA" => Some(SpellerAlgorithm::ContextAware),
            "CAE" => Some(SpellerAlgorithm::IgnorantContext),
            _ => None,
        }
    }
}

/// Simulation knobs.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub online: OnlineConfig,
    /// Net decision count that issues a command.
    pub command_threshold: i64,
    /// Samples after which an attempt issues the majority command regardless.
    pub attempt_cap: usize,
    /// Running balanced accuracy window and shift, in samples.
    pub ba_window: usize,
    pub ba_shift: usize,
    /// Scale of the perturbation defining the subject-unspecific initial
    /// classifier.
    pub init_perturb: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            online: OnlineConfig::default(),
            command_threshold: 8,
            attempt_cap: 60,
            ba_window: 120,
            ba_shift: 60,
            init_perturb: 0.5,
        }
    }
}

/// One point of the running balanced-accuracy trace.
#[derive(Debug, Clone)]
pub struct BaPoint {
    pub window_end_sample: usize,
    pub running_ba: f64,
}

/// Outcome of one learner's full typing session.
#[derive(Debug, Clone)]
pub struct SpellerTrace {
    pub algorithm: SpellerAlgorithm,
    pub points: Vec<BaPoint>,
    pub typed: String,
    pub samples_used: usize,
    /// Stream ran out before the words were finished.
    pub truncated: bool,
}

impl SpellerTrace {
    pub fn mean_ba(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.points.iter().map(|p| p.running_ba).sum::<f64>() / self.points.len() as f64
    }
}

/// Runs the typing task once per requested learner, replaying the same
/// subject stream from the start for each.
pub fn simulate_spelling(
    stream: &SubjectStream,
    words: &[String],
    lm: &CharLm,
    algorithms: &[SpellerAlgorithm],
    cfg: &SimConfig,
    init_seed: u64,
) -> Result<Vec<SpellerTrace>> {
    let text = words.join(" ");
    let targets: Vec<usize> = text
        .chars()
        .map(|c| {
            symbol_of(c).ok_or_else(|| Error::InvalidParameter {
                name: "words",
                reason: format!("character {c:?} is outside the alphabet"),
            })
        })
        .collect::<Result<_>>()?;

    algorithms
        .iter()
        .map(|&alg| run_session(stream.clone(), &targets, lm, alg, cfg, init_seed))
        .collect()
}

/// The subject-unspecific starting classifier: the true initial moments with
/// perturbed means.
fn initial_buffer(stream: &SubjectStream, cfg: &SimConfig, seed: u64) -> Result<OnlineBuffer> {
    let mut rng = derive_rng(seed, &[0x5e11e7]);
    let perturbed: Vec<DVector<f64>> = stream
        .initial_means
        .iter()
        .map(|m| {
            m + DVector::from_fn(FEATURE_DIM, |_, _| {
                cfg.init_perturb * rng.sample::<f64, _>(StandardNormal)
            })
        })
        .collect();
    let cov = &stream.initial_cov + DMatrix::identity(FEATURE_DIM, FEATURE_DIM) * 1e-6;
    OnlineBuffer::new(
        cfg.online.capacity,
        [perturbed[0].clone(), perturbed[1].clone()],
        cov,
        [0.5, 0.5],
    )
}

fn run_session(
    mut stream: SubjectStream,
    targets: &[usize],
    lm: &CharLm,
    algorithm: SpellerAlgorithm,
    cfg: &SimConfig,
    init_seed: u64,
) -> Result<SpellerTrace> {
    stream.rewind();
    let mut buffer = initial_buffer(&stream, cfg, init_seed)?;
    let mut prefix: Vec<usize> = Vec::new();
    let mut typed = String::new();
    let mut truncated = false;

    let mut decisions: Vec<usize> = Vec::new();
    let mut truths: Vec<usize> = Vec::new();
    let mut points = Vec::new();
    let mut next_emit = cfg.ba_window;

    'typing: for &target in targets {
        let priors = lm_priors(lm, &prefix);
        let tree = build_tree(&priors);
        let mut node = tree.root().clone();
        let mut phase_flipped = false;

        while !node.is_leaf() {
            let split = node.split.expect("internal node");
            let desired = if target < split { Side::Left } else { Side::Right };
            let desired_class = match desired {
                Side::Left => 0,
                Side::Right => 1,
            };
            let context_label = context_label_at_node(&tree, &node)?;

            // one attempt: integrate decisions until the threshold or the cap
            let mut net: i64 = 0;
            let mut used = 0;
            let command = loop {
                let Some(x) = stream.next_of_class(desired_class) else {
                    truncated = true;
                    break 'typing;
                };
                let plabel = match algorithm {
                    SpellerAlgorithm::Supervised => ProbLabel::one_hot(2, desired_class),
                    SpellerAlgorithm::ContextAware => context_label.clone(),
                    SpellerAlgorithm::IgnorantContext => ProbLabel::uniform(2),
                };
                let decision = buffer.step(x, plabel, desired_class, &cfg.online);
                decisions.push(decision);
                truths.push(desired_class);
                if decisions.len() >= next_emit {
                    let lo = decisions.len() - cfg.ba_window;
                    points.push(BaPoint {
                        window_end_sample: decisions.len(),
                        running_ba: balanced_accuracy(&decisions[lo..], &truths[lo..], 2),
                    });
                    next_emit += cfg.ba_shift;
                }
                net += if decision == 0 { 1 } else { -1 };
                used += 1;
                if net.abs() >= cfg.command_threshold || used >= cfg.attempt_cap {
                    // ties at the cap fall back to the first side
                    break if net >= 0 { Side::Left } else { Side::Right };
                }
            };

            if command == desired {
                node = tree.child(&node, command, phase_flipped)?;
            } else {
                // automatic correction: stay put, flip the heavy-side phase
                phase_flipped = !phase_flipped;
                node = tree.resplit_flipped(&node, phase_flipped);
            }
        }
        if !truncated {
            typed.push(super::lm::symbol_char(node.lo));
            prefix.push(node.lo);
        }
    }

    Ok(SpellerTrace {
        algorithm,
        points,
        typed,
        samples_used: decisions.len(),
        truncated,
    })
}

fn lm_priors(lm: &CharLm, prefix: &[usize]) -> [f64; ALPHABET_SIZE] {
    lm.next_distribution(prefix)
}

/// One row of the speller report.
#[derive(Debug, Clone)]
pub struct SpellerRow {
    pub subject: usize,
    pub algorithm: SpellerAlgorithm,
    pub window_end_sample: usize,
    pub running_ba: f64,
}

/// Multi-subject study: a fresh synthetic stream per subject, the same words
/// for every learner. Rows come back ordered by (subject, algorithm, window).
pub fn run_speller_study(
    subjects: usize,
    words: &[String],
    algorithms: &[SpellerAlgorithm],
    stream_cfg: &StreamConfig,
    sim_cfg: &SimConfig,
    master_seed: u64,
) -> Result<Vec<SpellerRow>> {
    let lm = CharLm::builtin();
    let per_subject: Vec<Vec<SpellerRow>> = (0..subjects)
        .into_par_iter()
        .map(|subject| -> Result<Vec<SpellerRow>> {
            let mut rng = derive_rng(master_seed, &[0x57, subject as u64]);
            let stream = synth_stream(stream_cfg, &mut rng)?;
            let init_seed = master_seed ^ (subject as u64).wrapping_mul(0x9e37_79b9);
            let traces = simulate_spelling(&stream, words, &lm, algorithms, sim_cfg, init_seed)?;
            let mut rows = Vec::new();
            for t in traces {
                for p in &t.points {
                    rows.push(SpellerRow {
                        subject,
                        algorithm: t.algorithm,
                        window_end_sample: p.window_end_sample,
                        running_ba: p.running_ba,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per_subject.into_iter().flatten().collect())
}

/// CSV form: `subject,algorithm,window_end_sample,running_ba`.
pub fn speller_csv(rows: &[SpellerRow]) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("subject,algorithm,window_end_sample,running_ba\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.subject,
            r.algorithm.name(),
            r.window_end_sample,
            r.running_ba
        )
        .unwrap();
    }
    out
}
