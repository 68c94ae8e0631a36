//! Voting-weight mechanisms layered over the smooth booster.
//!
//! Both combiners read the same cached pre-update weak predictions the weight
//! recursion uses, so one prediction pass per example is shared by everything.
//!
//! * [`OcpCombiner`] keeps voting weights on the probability simplex and runs
//!   projected subgradient descent on the hinge loss
//!   `max(0, theta - sum_i alpha_i * y * h_i(x))` whenever the combined margin
//!   falls below `theta`.
//! * [`ExpCombiner`] treats the N prefix ensembles `sign(h_1 + ... + h_i)` as
//!   experts and runs Hedge over them, sampling one expert per prediction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::sparse::{sign01, Label};

/// Point on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVector(Vec<f64>);

impl AlphaVector {
    pub fn uniform(n: usize) -> Self {
        AlphaVector(vec![1.0 / n as f64; n])
    }

    /// Wraps `values` if they already lie on the simplex (sum within 1e-9).
    pub fn new(values: Vec<f64>) -> Option<Self> {
        let sum: f64 = values.iter().sum();
        (values.iter().all(|&a| a >= 0.0) && (sum - 1.0).abs() <= 1e-9 && !values.is_empty())
            .then_some(AlphaVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `sum_i alpha_i * s_i`.
    pub fn combine(&self, values: &[f64]) -> f64 {
        self.0.iter().zip(values).map(|(a, s)| a * s).sum()
    }
}

pub fn hinge_loss(alpha: &AlphaVector, signed_preds: &[f64], theta: f64) -> f64 {
    (theta - alpha.combine(signed_preds)).max(0.0)
}

/// Euclidean projection onto the probability simplex by sort-and-threshold,
/// O(N log N).
///
/// # Panics
///
/// Panics on an empty input or a NaN entry.
pub fn project_simplex(v: &[f64]) -> AlphaVector {
    assert!(!v.is_empty(), "cannot project an empty vector");
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("NaN in simplex projection"));
    let mut prefix = 0.0;
    let mut tau = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        prefix += u;
        let candidate = (prefix - 1.0) / (j + 1) as f64;
        // The condition holds for a prefix of ranks, so the last hit is rho.
        if u - candidate > 0.0 {
            tau = candidate;
        }
    }
    AlphaVector(v.iter().map(|&x| (x - tau).max(0.0)).collect())
}

/// One online step: leave `alpha` alone when the combined margin clears
/// `theta`, otherwise move along the hinge subgradient and project back.
pub fn ocp_step(alpha: &AlphaVector, signed_preds: &[f64], theta: f64, eta: f64) -> AlphaVector {
    if alpha.combine(signed_preds) >= theta {
        return alpha.clone();
    }
    let moved: Vec<f64> = alpha.0.iter().zip(signed_preds).map(|(a, s)| a + eta * s).collect();
    project_simplex(&moved)
}

/// Running OCP state plus the bookkeeping needed to audit it afterwards.
#[derive(Debug, Clone)]
pub struct OcpCombiner {
    alpha: AlphaVector,
    theta: f64,
    steps: u64,
    cumulative_loss: f64,
    // Loss of the prefix-uniform comparator with mass 1/k on the first k learners.
    comparator_loss: Vec<f64>,
    mistakes_below_theta: u64,
}

impl OcpCombiner {
    pub fn new(n: usize, theta: f64) -> Self {
        Self {
            alpha: AlphaVector::uniform(n),
            theta,
            steps: 0,
            cumulative_loss: 0.0,
            comparator_loss: vec![0.0; n],
            mistakes_below_theta: 0,
        }
    }

    pub fn alpha(&self) -> &AlphaVector {
        &self.alpha
    }

    pub fn predict(&self, preds: &[f64]) -> Label {
        sign01(self.alpha.combine(preds))
    }

    pub fn update(&mut self, preds: &[f64], y: Label, prediction: Label) {
        self.steps += 1;
        let signed: Vec<f64> = preds.iter().map(|p| y.sign() * p).collect();
        let loss = hinge_loss(&self.alpha, &signed, self.theta);
        self.cumulative_loss += loss;
        if prediction != y && loss < self.theta - 1e-12 {
            self.mistakes_below_theta += 1;
        }
        let mut prefix = 0.0;
        for (k, s) in signed.iter().enumerate() {
            prefix += s;
            self.comparator_loss[k] += (self.theta - prefix / (k + 1) as f64).max(0.0);
        }
        let eta = 1.0 / (self.steps as f64).sqrt();
        self.alpha = ocp_step(&self.alpha, &signed, self.theta, eta);
    }

    pub fn cumulative_loss(&self) -> f64 {
        self.cumulative_loss
    }

    pub fn comparator_losses(&self) -> &[f64] {
        &self.comparator_loss
    }

    /// Rounds where the prediction was wrong but the hinge loss was below
    /// `theta`; always zero for a correct implementation.
    pub fn mistakes_below_theta(&self) -> u64 {
        self.mistakes_below_theta
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }
}

/// Each prefix ensemble's vote: expert i says `sign(p_1 + ... + p_i)`.
pub fn exp_expert_predictions(preds: &[f64]) -> Vec<Label> {
    let mut total = 0.0;
    preds
        .iter()
        .map(|p| {
            total += p;
            sign01(total)
        })
        .collect()
}

/// Hedge weights over N experts, kept normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertWeights {
    weights: Vec<f64>,
    steps: u64,
}

impl ExpertWeights {
    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
            steps: 0,
        }
    }

    pub fn from_weights(weights: Vec<f64>) -> Self {
        let mut w = Self { weights, steps: 0 };
        w.normalize();
        w
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn normalize(&mut self) {
        let total: f64 = self.weights.iter().sum();
        // Floored so a long-wrong expert never underflows to exactly zero.
        for w in &mut self.weights {
            *w = (*w / total).max(f64::MIN_POSITIVE);
        }
    }
}

/// Samples one expert in proportion to its weight and returns its vote.
pub fn exp_predict<R: Rng + ?Sized>(w: &ExpertWeights, expert_preds: &[Label], rng: &mut R) -> Label {
    let total: f64 = w.weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (weight, &label) in w.weights.iter().zip(expert_preds) {
        if u < *weight {
            return label;
        }
        u -= weight;
    }
    // Rounding left a sliver of mass past the last expert.
    *expert_preds.last().expect("no experts")
}

/// Vote of the weight-summed experts, for reproducibility studies.
pub fn exp_predict_deterministic(w: &ExpertWeights, expert_preds: &[Label]) -> Label {
    sign01(w.weights.iter().zip(expert_preds).map(|(w, l)| w * l.sign()).sum())
}

/// Hedge step with the anytime rate `sqrt(8 ln N / t)`.
pub fn hedge_update(w: &ExpertWeights, expert_preds: &[Label], y: Label) -> ExpertWeights {
    let t = (w.steps + 1) as f64;
    let n = w.weights.len() as f64;
    hedge_update_with_rate(w, expert_preds, y, (8.0 * n.ln() / t).sqrt())
}

pub fn hedge_update_with_rate(w: &ExpertWeights, expert_preds: &[Label], y: Label, eta: f64) -> ExpertWeights {
    let penalty = (-eta).exp();
    let mut next = ExpertWeights {
        weights: w
            .weights
            .iter()
            .zip(expert_preds)
            .map(|(&wi, &p)| if p == y { wi } else { wi * penalty })
            .collect(),
        steps: w.steps + 1,
    };
    next.normalize();
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExpMode {
    #[default]
    Randomized,
    Deterministic,
}

#[derive(Debug, Clone)]
pub struct ExpCombiner {
    weights: ExpertWeights,
    rng: ChaCha8Rng,
    mode: ExpMode,
    pending: Vec<Label>,
    expert_mistakes: Vec<u64>,
}

impl ExpCombiner {
    pub fn new(n: usize, seed: u64, mode: ExpMode) -> Self {
        Self {
            weights: ExpertWeights::uniform(n),
            rng: ChaCha8Rng::seed_from_u64(seed),
            mode,
            pending: Vec::new(),
            expert_mistakes: vec![0; n],
        }
    }

    pub fn predict(&mut self, preds: &[f64]) -> Label {
        self.pending = exp_expert_predictions(preds);
        match self.mode {
            ExpMode::Randomized => exp_predict(&self.weights, &self.pending, &mut self.rng),
            ExpMode::Deterministic => exp_predict_deterministic(&self.weights, &self.pending),
        }
    }

    pub fn update(&mut self, y: Label) {
        for (m, &p) in self.expert_mistakes.iter_mut().zip(&self.pending) {
            if p != y {
                *m += 1;
            }
        }
        self.weights = hedge_update(&self.weights, &self.pending, y);
    }

    pub fn weights(&self) -> &ExpertWeights {
        &self.weights
    }

    pub fn expert_mistakes(&self) -> &[u64] {
        &self.expert_mistakes
    }
}

/// How the booster turns cached weak predictions into its own prediction.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Combiner {
    /// `sign(sum_i h_i(x))` over all N learners.
    Uniform,
    Ocp(OcpCombiner),
    Exp(ExpCombiner),
}

impl Combiner {
    pub fn predict(&mut self, preds: &[f64]) -> Label {
        match self {
            Combiner::Uniform => sign01(preds.iter().sum()),
            Combiner::Ocp(c) => c.predict(preds),
            Combiner::Exp(c) => c.predict(preds),
        }
    }

    pub fn update(&mut self, preds: &[f64], y: Label, prediction: Label) {
        match self {
            Combiner::Uniform => {}
            Combiner::Ocp(c) => c.update(preds, y, prediction),
            Combiner::Exp(c) => c.update(y),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    const POS: Label = Label::Positive;
    const NEG: Label = Label::Negative;
    const THETA: f64 = 1.0 / 21.0;

    /// Brute-force projection: scan a grid over the simplex (step `h`) and
    /// keep the closest point.
    fn grid_projection(v: &[f64], h: f64) -> Vec<f64> {
        let steps = (1.0 / h).round() as usize;
        let mut best = (f64::INFINITY, vec![]);
        let mut consider = |p: Vec<f64>| {
            let d: f64 = p.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum();
            if d < best.0 {
                best = (d, p);
            }
        };
        match v.len() {
            2 => (0..=steps).for_each(|i| {
                let a = i as f64 * h;
                consider(vec![a, 1.0 - a]);
            }),
            3 => {
                for i in 0..=steps {
                    for j in 0..=steps - i {
                        let (a, b) = (i as f64 * h, j as f64 * h);
                        consider(vec![a, b, (1.0 - a - b).max(0.0)]);
                    }
                }
            }
            _ => unimplemented!(),
        }
        best.1
    }

    #[test]
    fn hinge_examples() {
        let a = AlphaVector::new(vec![1.0]).unwrap();
        assert_eq!(hinge_loss(&a, &[THETA], THETA), 0.0);
        assert_eq!(hinge_loss(&a, &[0.0], THETA), THETA);
        assert!((hinge_loss(&a, &[-1.0], THETA) - (1.0 + THETA)).abs() < 1e-15);
    }

    #[test]
    fn projection_examples() {
        let third = 1.0 / 3.0;
        let p = project_simplex(&[third, third, third]);
        for a in p.as_slice() {
            assert!((a - third).abs() < 1e-15);
        }
        assert_eq!(project_simplex(&[0.0, 0.0]).as_slice(), &[0.5, 0.5]);

        let p = project_simplex(&[1.2, 0.3]);
        let grid = grid_projection(&[1.2, 0.3], 1e-4);
        for (a, b) in p.as_slice().iter().zip(&grid) {
            assert!((a - b).abs() < 2e-4);
        }
        // KKT: both coordinates active, so both shift by the same tau = 0.25.
        assert!((p.as_slice()[0] - 0.95).abs() < 1e-12);
        assert!((p.as_slice()[1] - 0.05).abs() < 1e-12);
    }

    #[test]
    fn ocp_step_examples() {
        let a = AlphaVector::uniform(2);
        assert_eq!(ocp_step(&a, &[1.0, 1.0], THETA, 0.5), a);

        let next = ocp_step(&a, &[1.0, -1.0], THETA, 0.1);
        assert!((next.as_slice()[0] - 0.6).abs() < 1e-12);
        assert!((next.as_slice()[1] - 0.4).abs() < 1e-12);

        let a = AlphaVector::new(vec![1.0, 0.0]).unwrap();
        let next = ocp_step(&a, &[-1.0, 1.0], THETA, 2.0);
        let grid = grid_projection(&[-1.0, 2.0], 1e-4);
        assert_eq!(grid, vec![0.0, 1.0]);
        assert_eq!(next.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn expert_prediction_examples() {
        assert_eq!(exp_expert_predictions(&[1.0, -1.0, -1.0]), vec![POS, POS, NEG]);
        assert_eq!(exp_expert_predictions(&[1.0; 4]), vec![POS; 4]);
        assert_eq!(exp_expert_predictions(&[-0.5, 1.0]), vec![NEG, POS]);
    }

    #[test]
    fn exp_predict_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = ExpertWeights::from_weights(vec![0.2, 0.5, 0.3]);
        for _ in 0..100 {
            assert_eq!(exp_predict(&w, &[POS; 3], &mut rng), POS);
        }

        let w = ExpertWeights::from_weights(vec![5e-13, 5e-13, 1.0 - 1e-12]);
        for _ in 0..1000 {
            assert_eq!(exp_predict(&w, &[POS, POS, NEG], &mut rng), NEG);
        }

        // Monte Carlo: a fair two-expert split lands within half a percent.
        let w = ExpertWeights::uniform(2);
        let draws = 100_000;
        let pos = (0..draws)
            .filter(|_| exp_predict(&w, &[POS, NEG], &mut rng) == POS)
            .count();
        let freq = pos as f64 / draws as f64;
        assert!((0.495..=0.505).contains(&freq), "{freq}");
    }

    #[test]
    fn hedge_examples() {
        let w = ExpertWeights::uniform(3);
        assert_eq!(hedge_update(&w, &[POS; 3], POS).weights(), w.weights());

        let next = hedge_update_with_rate(&ExpertWeights::uniform(2), &[POS, NEG], POS, 2f64.ln());
        assert!((next.weights()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((next.weights()[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(next.steps(), 1);

        let mut w = ExpertWeights::uniform(2);
        for _ in 0..100 {
            w = hedge_update(&w, &[POS, NEG], POS);
        }
        assert!(w.weights()[1] < 1e-3);
    }

    #[test]
    fn hedge_rate_follows_anytime_schedule() {
        // First step at N = 2: eta = sqrt(8 ln 2).
        let next = hedge_update(&ExpertWeights::uniform(2), &[POS, NEG], POS);
        let ratio = next.weights()[1] / next.weights()[0];
        assert!((ratio.ln() + (8.0 * 2f64.ln()).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn deterministic_mode_votes_by_weight() {
        let w = ExpertWeights::from_weights(vec![0.7, 0.3]);
        assert_eq!(exp_predict_deterministic(&w, &[NEG, POS]), NEG);
        assert_eq!(exp_predict_deterministic(&ExpertWeights::uniform(2), &[NEG, POS]), POS);
    }

    #[test]
    fn ocp_combiner_tracks_losses() {
        let mut c = OcpCombiner::new(2, THETA);
        let preds = [1.0, -1.0];
        let pred = c.predict(&preds);
        c.update(&preds, NEG, pred);
        // Uniform alpha: margin 0, loss theta; comparators k=1: 1+theta, k=2: theta.
        assert!((c.cumulative_loss() - THETA).abs() < 1e-15);
        assert!((c.comparator_losses()[0] - (1.0 + THETA)).abs() < 1e-15);
        assert!((c.comparator_losses()[1] - THETA).abs() < 1e-15);
        assert_eq!(c.mistakes_below_theta(), 0);
    }

    fn arb_vec() -> impl Strategy<Value = Vec<f64>> {
        (1usize..12).prop_flat_map(|n| proptest::collection::vec(-5.0f64..5.0, n))
    }

    proptest! {
        #[test]
        fn projection_lands_on_simplex(v in arb_vec()) {
            let p = project_simplex(&v);
            prop_assert!(AlphaVector::new(p.as_slice().to_vec()).is_some());
            let sum: f64 = p.as_slice().iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn projection_is_idempotent(v in arb_vec()) {
            let p = project_simplex(&v);
            let q = project_simplex(p.as_slice());
            for (a, b) in p.as_slice().iter().zip(q.as_slice()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn projection_beats_random_feasible_points(v in arb_vec(), seed in any::<u64>()) {
            // Optimality: no sampled simplex point is strictly closer.
            let p = project_simplex(&v);
            let dist = |q: &[f64]| -> f64 { q.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum() };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..50 {
                let raw: Vec<f64> = (0..v.len()).map(|_| -rng.gen::<f64>().ln()).collect();
                let total: f64 = raw.iter().sum();
                let q: Vec<f64> = raw.iter().map(|r| r / total).collect();
                prop_assert!(dist(p.as_slice()) <= dist(&q) + 1e-12);
            }
        }

        #[test]
        fn hedge_weights_stay_normalized(wrong in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 5), 1..100)) {
            let mut w = ExpertWeights::uniform(5);
            for row in &wrong {
                let preds: Vec<Label> = row.iter().map(|&b| if b { NEG } else { POS }).collect();
                w = hedge_update(&w, &preds, POS);
                let sum: f64 = w.weights().iter().sum();
                prop_assert!((sum - 1.0).abs() <= 1e-9);
                prop_assert!(w.weights().iter().all(|&x| x > 0.0));
            }
        }
    }
}
