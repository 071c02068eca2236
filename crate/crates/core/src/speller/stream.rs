//! Synthetic two-class feature streams with programmable mean drift,
//! replacing recorded signals the simulator has no access to.

use crate::error::Result;
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const FEATURE_DIM: usize = 6;

/// Mean-drift presets over a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftPreset {
    /// Stationary classes.
    None,
    /// Both class means translate together along one axis.
    Shift,
    /// The class means swap positions along the first axis halfway through,
    /// the pattern an unsupervised tracker cannot follow by proximity.
    Crossing,
}

impl DriftPreset {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(DriftPreset::None),
            "shift" => Some(DriftPreset::Shift),
            "crossing" => Some(DriftPreset::Crossing),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DriftPreset::None => "none",
            DriftPreset::Shift => "shift",
            DriftPreset::Crossing => "crossing",
        }
    }
}

#[derive(Debug, Clone)]
pub struct StreamConfig {
    pub drift: DriftPreset,
    /// Samples generated per class.
    pub len_per_class: usize,
    /// Recorded samples per class over which the drift runs its full course;
    /// the trajectory holds its endpoint afterwards. Keeps the drift inside a
    /// typing session's footprint while the stream itself carries reserve.
    pub drift_horizon: usize,
    /// Base separation of the class means along the first two axes.
    pub separation: f64,
    /// Per-subject jitter applied to the base means.
    pub subject_jitter: f64,
}

impl Default for StreamConfig {
    fn default() -> Self {
        Self {
            drift: DriftPreset::Crossing,
            len_per_class: 6000,
            drift_horizon: 500,
            separation: 1.7,
            subject_jitter: 0.3,
        }
    }
}

/// Per-class sample queues in recorded order plus the generating moments at
/// recording start (used to build the initial classifier).
#[derive(Debug, Clone)]
pub struct SubjectStream {
    queues: [Vec<DVector<f64>>; 2],
    consumed: [usize; 2],
    pub initial_means: [DVector<f64>; 2],
    pub initial_cov: DMatrix<f64>,
}

impl SubjectStream {
    /// Next unused sample of the class, in recorded order.
    pub fn next_of_class(&mut self, class: usize) -> Option<DVector<f64>> {
        let i = self.consumed[class];
        if i >= self.queues[class].len() {
            return None;
        }
        self.consumed[class] += 1;
        Some(self.queues[class][i].clone())
    }

    pub fn rewind(&mut self) {
        self.consumed = [0, 0];
    }

    pub fn remaining(&self, class: usize) -> usize {
        self.queues[class].len() - self.consumed[class]
    }
}

/// Class mean at normalized session time `t` in [0, 1].
fn mean_at(
    cfg: &StreamConfig,
    base: &[DVector<f64>; 2],
    class: usize,
    t: f64,
) -> DVector<f64> {
    let mut m = base[class].clone();
    match cfg.drift {
        DriftPreset::None => {}
        DriftPreset::Shift => {
            // common translation, up to two separations by session end
            m[2] += 2.0 * cfg.separation * t;
        }
        DriftPreset::Crossing => {
            // near-total swap: the classes exchange positions along the first
            // axis and nearly meet on the second, leaving a residual gap that
            // contextual labels can exploit but proximity tracking cannot
            let sign = if class == 0 { 1.0 } else { -1.0 };
            m[0] = sign * cfg.separation * (1.0 - 2.0 * t);
            m[1] = sign * cfg.separation * (0.25 + 0.75 * (1.0 - 2.0 * t).abs());
        }
    }
    m
}

/// Generates a subject's stream. The two classes are interleaved on a common
/// recording clock so drift affects them coherently; the shared covariance
/// breathes slowly around its base value.
pub fn synth_stream(cfg: &StreamConfig, rng: &mut ChaCha8Rng) -> Result<SubjectStream> {
    let sep = cfg.separation;
    let jitter = cfg.subject_jitter;
    let mut base_mean = |sign: f64| -> DVector<f64> {
        let mut m = DVector::zeros(FEATURE_DIM);
        m[0] = sign * sep;
        m[1] = sign * sep;
        for i in 0..FEATURE_DIM {
            m[i] += jitter * rng.sample::<f64, _>(StandardNormal);
        }
        m
    };
    let base = [base_mean(1.0), base_mean(-1.0)];

    let mut cov = DMatrix::identity(FEATURE_DIM, FEATURE_DIM);
    for i in 0..FEATURE_DIM {
        cov[(i, i)] = 1.0 - 0.08 * i as f64;
    }
    cov[(0, 1)] = 0.2;
    cov[(1, 0)] = 0.2;

    let n = cfg.len_per_class;
    let mut queues = [Vec::with_capacity(n), Vec::with_capacity(n)];
    let horizon = (2 * cfg.drift_horizon.max(1)) as f64;
    for k in 0..n {
        for class in 0..2 {
            // recording clock: samples of the two classes alternate
            let t = ((2 * k + class) as f64 / horizon).min(1.0);
            let scale = 1.0 + 0.15 * (2.0 * std::f64::consts::PI * t).sin();
            let chol = Cholesky::new(&cov * scale).expect("positive definite by construction");
            let z = DVector::from_fn(FEATURE_DIM, |_, _| rng.sample::<f64, _>(StandardNormal));
            let x = mean_at(cfg, &base, class, t) + chol.l() * z;
            queues[class].push(x);
        }
    }

    Ok(SubjectStream {
        queues,
        consumed: [0, 0],
        initial_means: [
            mean_at(cfg, &base, 0, 0.0),
            mean_at(cfg, &base, 1, 0.0),
        ],
        initial_cov: cov,
    })
}
