//! Online weak learners.
//!
//! Every learner follows the same contract: `predict` reads the current
//! hypothesis and returns a value in `[-1, 1]`; `update` consumes one example
//! together with a weight in `[0, 1]`. Learners never see an example's label
//! before the booster has asked them for a prediction on it.

use std::fmt;
use std::str::FromStr;

use crate::error::BoostError;
use crate::sparse::{dot_dense, sign01, Label, SparseVector};

/// Importance weight attached to one example for one learner.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ExampleWeight(f64);

impl ExampleWeight {
    pub const ONE: ExampleWeight = ExampleWeight(1.0);
    pub const ZERO: ExampleWeight = ExampleWeight(0.0);

    pub fn new(value: f64) -> Result<Self, BoostError> {
        if (0.0..=1.0).contains(&value) {
            Ok(ExampleWeight(value))
        } else {
            Err(BoostError::InvalidParams(format!(
                "example weight {value} outside [0, 1]"
            )))
        }
    }

    /// For values the caller has already shown to be in `[0, 1]`.
    pub(crate) fn clamped(value: f64) -> Self {
        ExampleWeight(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

pub trait WeakLearner {
    /// Current hypothesis evaluated at `x`, in `[-1, 1]`.
    fn predict(&self, x: &SparseVector) -> f64;

    fn update(&mut self, x: &SparseVector, y: Label, w: ExampleWeight);

    /// `times` unit-weight updates on the same example.
    fn update_repeated(&mut self, x: &SparseVector, y: Label, times: u64) {
        for _ in 0..times {
            self.update(x, y, ExampleWeight::ONE);
        }
    }
}

fn grow(dense: &mut Vec<f64>, x: &SparseVector) {
    let need = x.max_index() as usize + 1;
    if dense.len() < need {
        dense.resize(need, 0.0);
    }
}

fn dense_to_sparse(dense: &[f64]) -> SparseVector {
    SparseVector::from_sorted_unchecked(dense.iter().enumerate().skip(1).map(|(i, &v)| (i as u32, v)).collect())
}

fn sparse_to_dense(h: &SparseVector) -> Vec<f64> {
    let mut dense = Vec::new();
    grow(&mut dense, h);
    for (i, v) in h.iter() {
        dense[i as usize] = v;
    }
    dense
}

/// Mistake-driven linear classifier. The correction on a mistake is scaled by
/// the example weight; the output is the hard sign of `<h, x>`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Perceptron {
    // Dense by feature id; slot 0 unused.
    weights: Vec<f64>,
}

impl Perceptron {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_hypothesis(h: &SparseVector) -> Self {
        Self {
            weights: sparse_to_dense(h),
        }
    }

    pub fn hypothesis(&self) -> SparseVector {
        dense_to_sparse(&self.weights)
    }

    fn score(&self, x: &SparseVector) -> f64 {
        dot_dense(x, &self.weights)
    }
}

impl WeakLearner for Perceptron {
    fn predict(&self, x: &SparseVector) -> f64 {
        sign01(self.score(x)).sign()
    }

    fn update(&mut self, x: &SparseVector, y: Label, w: ExampleWeight) {
        if w.value() == 0.0 || y.sign() * self.score(x) > 0.0 {
            return;
        }
        grow(&mut self.weights, x);
        let step = w.value() * y.sign();
        for (i, v) in x.iter() {
            self.weights[i as usize] += step * v;
        }
    }

    fn update_repeated(&mut self, x: &SparseVector, y: Label, times: u64) {
        // Once the example is classified with positive margin further copies are no-ops.
        for _ in 0..times {
            if y.sign() * self.score(x) > 0.0 || x.is_empty() {
                break;
            }
            self.update(x, y, ExampleWeight::ONE);
        }
    }
}

/// Projected online gradient ascent on the linear reward `w * y * <h, x>`,
/// constrained to the unit L2 ball, with step `1 / sqrt(t)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OcpLinear {
    weights: Vec<f64>,
    norm_sq: f64,
    steps: u64,
}

impl OcpLinear {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts from `h` (projected into the unit ball) with `steps` examples
    /// already consumed.
    pub fn with_state(h: &SparseVector, steps: u64) -> Self {
        let mut s = Self {
            weights: sparse_to_dense(h),
            norm_sq: h.norm_squared(),
            steps,
        };
        s.project();
        s
    }

    pub fn hypothesis(&self) -> SparseVector {
        dense_to_sparse(&self.weights)
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn norm(&self) -> f64 {
        self.weights.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn project(&mut self) {
        // The running norm drifts by rounding; recompute when near the boundary.
        if self.norm_sq <= 1.0 - 1e-9 {
            return;
        }
        self.norm_sq = self.weights.iter().map(|v| v * v).sum();
        if self.norm_sq > 1.0 {
            let scale = 1.0 / self.norm_sq.sqrt();
            for v in &mut self.weights {
                *v *= scale;
            }
            self.norm_sq = self.weights.iter().map(|v| v * v).sum();
        }
    }
}

impl WeakLearner for OcpLinear {
    fn predict(&self, x: &SparseVector) -> f64 {
        dot_dense(x, &self.weights).clamp(-1.0, 1.0)
    }

    fn update(&mut self, x: &SparseVector, y: Label, w: ExampleWeight) {
        self.steps += 1;
        if w.value() == 0.0 || x.is_empty() {
            return;
        }
        let step = w.value() * y.sign() / (self.steps as f64).sqrt();
        let inner = dot_dense(x, &self.weights);
        grow(&mut self.weights, x);
        for (i, v) in x.iter() {
            self.weights[i as usize] += step * v;
        }
        self.norm_sq = (self.norm_sq + 2.0 * step * inner + step * step * x.norm_squared()).max(0.0);
        self.project();
    }
}

pub const NB_VARIANCE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

/// Gaussian naive Bayes over weighted sufficient statistics.
///
/// Absent sparse entries count as explicit zeros, so the total weight for a
/// (feature, class) pair is the class weight itself and only the first two
/// moments are stored per feature.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NaiveBayes {
    class_weight: [f64; 2],
    // Indexed by feature id, then class slot.
    moments: Vec<[Moments; 2]>,
    // Per class, sum over known features of the log density at value 0.
    zero_input: [f64; 2],
}

impl NaiveBayes {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn class_weight(&self, y: Label) -> f64 {
        self.class_weight[y.index()]
    }

    /// `(sum of w*v, sum of w*v^2, sum of w)` for one feature and class.
    pub fn accumulators(&self, feature: u32, y: Label) -> (f64, f64, f64) {
        let m = self
            .moments
            .get(feature as usize)
            .map(|m| m[y.index()])
            .unwrap_or_default();
        (m.sum, m.sum_sq, self.class_weight[y.index()])
    }

    /// Weighted mean and floored population variance for one feature and class.
    pub fn gaussian(&self, feature: u32, y: Label) -> Option<(f64, f64)> {
        let (s, s2, w) = self.accumulators(feature, y);
        if w <= 0.0 {
            return None;
        }
        let mean = s / w;
        Some((mean, (s2 / w - mean * mean).max(NB_VARIANCE_FLOOR)))
    }

    pub fn dimension(&self) -> usize {
        self.moments.len().saturating_sub(1)
    }

    /// Log-posterior difference `log P(+1 | x) - log P(-1 | x)`.
    pub fn log_odds(&self, x: &SparseVector) -> f64 {
        let [wn, wp] = self.class_weight;
        let prior = ((wp + 1.0) / (wn + 1.0)).ln();
        if wn <= 0.0 || wp <= 0.0 {
            return prior;
        }
        // Start from the all-zero input, then correct the present features.
        // Features unseen in training have identical zero-mean, floor-variance
        // densities under both classes and cancel.
        let mut acc = self.zero_input[1] - self.zero_input[0];
        for (i, v) in x.iter() {
            if let Some(m) = self.moments.get(i as usize) {
                acc += shift_from_zero(v, &m[1], wp) - shift_from_zero(v, &m[0], wn);
            }
        }
        prior + acc
    }

    fn refresh_zero_input(&mut self, c: usize) {
        let w = self.class_weight[c];
        self.zero_input[c] = if w > 0.0 {
            self.moments.iter().skip(1).map(|m| log_density_at_zero(&m[c], w)).sum()
        } else {
            0.0
        };
    }
}

fn mean_var(m: &Moments, w: f64) -> (f64, f64) {
    let mean = m.sum / w;
    (mean, (m.sum_sq / w - mean * mean).max(NB_VARIANCE_FLOOR))
}

fn log_density_at_zero(m: &Moments, w: f64) -> f64 {
    let (mean, var) = mean_var(m, w);
    -0.5 * var.ln() - mean * mean / (2.0 * var)
}

/// `log N(v) - log N(0)` under one feature's Gaussian.
fn shift_from_zero(v: f64, m: &Moments, w: f64) -> f64 {
    let (mean, var) = mean_var(m, w);
    -v * (v - 2.0 * mean) / (2.0 * var)
}

impl WeakLearner for NaiveBayes {
    fn predict(&self, x: &SparseVector) -> f64 {
        sign01(self.log_odds(x)).sign()
    }

    fn update(&mut self, x: &SparseVector, y: Label, w: ExampleWeight) {
        self.add(x, y, w.value());
    }

    fn update_repeated(&mut self, x: &SparseVector, y: Label, times: u64) {
        self.add(x, y, times as f64);
    }
}

impl NaiveBayes {
    fn add(&mut self, x: &SparseVector, y: Label, w: f64) {
        if w == 0.0 {
            return;
        }
        let c = y.index();
        self.class_weight[c] += w;
        let need = x.max_index() as usize + 1;
        let grew = self.moments.len() < need;
        if grew {
            self.moments.resize(need, Default::default());
        }
        for (i, v) in x.iter() {
            let m = &mut self.moments[i as usize][c];
            m.sum += w * v;
            m.sum_sq += w * v * v;
        }
        self.refresh_zero_input(c);
        if grew {
            self.refresh_zero_input(1 - c);
        }
    }
}

/// Which weak learner to instantiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeakKind {
    Perceptron,
    NaiveBayes,
    OcpLinear,
}

impl WeakKind {
    pub const ALL: [WeakKind; 3] = [WeakKind::Perceptron, WeakKind::NaiveBayes, WeakKind::OcpLinear];

    pub fn name(self) -> &'static str {
        match self {
            WeakKind::Perceptron => "perceptron",
            WeakKind::NaiveBayes => "naive-bayes",
            WeakKind::OcpLinear => "ocp-linear",
        }
    }

    pub fn build(self) -> WeakLearnerState {
        match self {
            WeakKind::Perceptron => WeakLearnerState::Perceptron(Perceptron::new()),
            WeakKind::NaiveBayes => WeakLearnerState::NaiveBayes(NaiveBayes::new()),
            WeakKind::OcpLinear => WeakLearnerState::OcpLinear(OcpLinear::new()),
        }
    }
}

impl fmt::Display for WeakKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeakKind {
    type Err = BoostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        WeakKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| BoostError::InvalidParams(format!("unknown weak learner {s:?}")))
    }
}

/// Closed set of weak learners, dispatched statically.
#[derive(Debug, Clone, PartialEq)]
pub enum WeakLearnerState {
    Perceptron(Perceptron),
    NaiveBayes(NaiveBayes),
    OcpLinear(OcpLinear),
}

impl WeakLearner for WeakLearnerState {
    fn predict(&self, x: &SparseVector) -> f64 {
        match self {
            WeakLearnerState::Perceptron(l) => l.predict(x),
            WeakLearnerState::NaiveBayes(l) => l.predict(x),
            WeakLearnerState::OcpLinear(l) => l.predict(x),
        }
    }

    fn update(&mut self, x: &SparseVector, y: Label, w: ExampleWeight) {
        match self {
            WeakLearnerState::Perceptron(l) => l.update(x, y, w),
            WeakLearnerState::NaiveBayes(l) => l.update(x, y, w),
            WeakLearnerState::OcpLinear(l) => l.update(x, y, w),
        }
    }

    fn update_repeated(&mut self, x: &SparseVector, y: Label, times: u64) {
        match self {
            WeakLearnerState::Perceptron(l) => l.update_repeated(x, y, times),
            WeakLearnerState::NaiveBayes(l) => l.update_repeated(x, y, times),
            WeakLearnerState::OcpLinear(l) => l.update_repeated(x, y, times),
        }
    }
}
