//! Reference learners to compare the smooth booster against: a single weak
//! learner, and OzaBoost (online AdaBoost through Poisson resampling).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{BoostError, Result};
use crate::online::{check_unit_ball, OnlineClassifier};
use crate::sparse::{sign01, Label, SparseVector};
use crate::weak::{ExampleWeight, WeakKind, WeakLearner, WeakLearnerState};

/// One weak learner trained on every example with weight 1.
#[derive(Debug, Clone)]
pub struct SingleLearner {
    learner: WeakLearnerState,
    pending: Option<SparseVector>,
}

impl SingleLearner {
    pub fn new(kind: WeakKind) -> Self {
        Self {
            learner: kind.build(),
            pending: None,
        }
    }

    pub fn learner(&self) -> &WeakLearnerState {
        &self.learner
    }
}

impl OnlineClassifier for SingleLearner {
    fn predict(&mut self, x: &SparseVector) -> Result<Label> {
        check_unit_ball(x)?;
        let p = sign01(self.learner.predict(x));
        self.pending = Some(x.clone());
        Ok(p)
    }

    fn update(&mut self, y: Label) -> Result<()> {
        let x = self.pending.take().ok_or(BoostError::UpdateWithoutPrediction)?;
        self.learner.update(&x, y, ExampleWeight::ONE);
        Ok(())
    }
}

pub const EPS_CLAMP: f64 = 1e-10;

/// Rates at or above this use an exact rejection sampler instead of counting
/// arrivals, whose cost grows linearly with the rate.
pub const POISSON_ARRIVAL_LIMIT: f64 = 100.0;

/// A Poisson(`lambda`) draw. Below [`POISSON_ARRIVAL_LIMIT`] this counts
/// unit-rate exponential arrivals before time `lambda`.
pub fn sample_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda.is_nan() || lambda <= 0.0 {
        return 0;
    }
    if lambda >= POISSON_ARRIVAL_LIMIT {
        let draw: f64 = match Poisson::new(lambda) {
            Ok(p) => p.sample(rng),
            Err(_) => lambda,
        };
        return draw as u64;
    }
    let mut k = 0;
    let mut elapsed = 0.0;
    loop {
        // 1 - u lies in (0, 1], keeping the log finite.
        elapsed -= (1.0 - rng.gen::<f64>()).ln();
        if elapsed > lambda {
            return k;
        }
        k += 1;
    }
}

/// How many copies of an example a learner trains on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PoissonMode {
    #[default]
    Sample,
    /// Every draw returns 1; makes the counter updates deterministic.
    AlwaysOne,
}

#[derive(Debug, Clone)]
pub struct OzaBoost {
    learners: Vec<WeakLearnerState>,
    lambda_correct: Vec<f64>,
    lambda_wrong: Vec<f64>,
    rng: ChaCha8Rng,
    mode: PoissonMode,
    pending: Option<SparseVector>,
}

impl OzaBoost {
    pub fn new(n: usize, kind: WeakKind, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(BoostError::InvalidParams("need at least one weak learner".into()));
        }
        Ok(Self {
            learners: vec![kind.build(); n],
            lambda_correct: vec![0.0; n],
            lambda_wrong: vec![0.0; n],
            rng: ChaCha8Rng::seed_from_u64(seed),
            mode: PoissonMode::Sample,
            pending: None,
        })
    }

    pub fn with_poisson_mode(mut self, mode: PoissonMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn learners(&self) -> &[WeakLearnerState] {
        &self.learners
    }

    pub fn lambda_correct(&self) -> &[f64] {
        &self.lambda_correct
    }

    pub fn lambda_wrong(&self) -> &[f64] {
        &self.lambda_wrong
    }

    /// Clamped weighted error of learner `i`; zero counters give the lower clamp.
    pub fn epsilon(&self, i: usize) -> f64 {
        let (sc, sw) = (self.lambda_correct[i], self.lambda_wrong[i]);
        let total = sc + sw;
        let raw = if total > 0.0 { sw / total } else { 0.0 };
        raw.clamp(EPS_CLAMP, 1.0 - EPS_CLAMP)
    }

    /// Predict, reveal and update; returns the pre-update prediction and the
    /// lambda each learner was handed.
    pub fn process_example(&mut self, x: &SparseVector, y: Label) -> Result<(Label, Vec<f64>)> {
        let prediction = self.predict(x)?;
        let lambdas = self.train(y)?;
        Ok((prediction, lambdas))
    }

    fn train(&mut self, y: Label) -> Result<Vec<f64>> {
        let x = self.pending.take().ok_or(BoostError::UpdateWithoutPrediction)?;
        let mut lambda = 1.0;
        let mut handed = Vec::with_capacity(self.learners.len());
        for i in 0..self.learners.len() {
            handed.push(lambda);
            let k = match self.mode {
                PoissonMode::Sample => sample_poisson(lambda, &mut self.rng),
                PoissonMode::AlwaysOne => 1,
            };
            self.learners[i].update_repeated(&x, y, k);
            if sign01(self.learners[i].predict(&x)) == y {
                self.lambda_correct[i] += lambda;
                lambda /= 2.0 * (1.0 - self.epsilon(i));
            } else {
                self.lambda_wrong[i] += lambda;
                lambda /= 2.0 * self.epsilon(i);
            }
        }
        Ok(handed)
    }
}

impl OnlineClassifier for OzaBoost {
    fn predict(&mut self, x: &SparseVector) -> Result<Label> {
        check_unit_ball(x)?;
        let vote: f64 = (0..self.learners.len())
            .map(|i| {
                let eps = self.epsilon(i);
                ((1.0 - eps) / eps).ln() * sign01(self.learners[i].predict(x)).sign()
            })
            .sum();
        self.pending = Some(x.clone());
        Ok(sign01(vote))
    }

    fn update(&mut self, y: Label) -> Result<()> {
        self.train(y).map(drop)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weak::NaiveBayes;

    const POS: Label = Label::Positive;
    const NEG: Label = Label::Negative;

    fn sv(pairs: &[(u32, f64)]) -> SparseVector {
        SparseVector::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn first_example_correct_branch() {
        // A fresh perceptron predicts +1 for anything.
        let mut b = OzaBoost::new(2, WeakKind::Perceptron, 0)
            .unwrap()
            .with_poisson_mode(PoissonMode::AlwaysOne);
        let (_, lambdas) = b.process_example(&sv(&[(1, 0.5)]), POS).unwrap();
        assert_eq!(b.lambda_correct()[0], 1.0);
        assert_eq!(b.epsilon(0), EPS_CLAMP);
        assert!((lambdas[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn first_example_wrong_branch() {
        // An empty example cannot move the perceptron off its +1 default.
        let mut b = OzaBoost::new(2, WeakKind::Perceptron, 0).unwrap();
        let (_, lambdas) = b.process_example(&SparseVector::new(), NEG).unwrap();
        assert_eq!(b.lambda_wrong()[0], 1.0);
        assert_eq!(b.epsilon(0), 1.0 - EPS_CLAMP);
        assert!((lambdas[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn zero_lambda_draws_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_poisson(0.0, &mut rng), 0);
        assert_eq!(sample_poisson(-1.0, &mut rng), 0);
    }

    #[test]
    fn huge_rates_are_cheap() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = sample_poisson(5e9, &mut rng);
        assert!((k as f64 - 5e9).abs() < 1e6);
    }

    #[test]
    fn poisson_mean_and_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for lambda in [0.3, 1.0, 4.5, 250.0] {
            let n = 200_000;
            let draws: Vec<f64> = (0..n).map(|_| sample_poisson(lambda, &mut rng) as f64).collect();
            let mean = draws.iter().sum::<f64>() / n as f64;
            let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64;
            assert!(
                (mean - lambda).abs() < 0.02 * lambda.sqrt().max(1.0),
                "{lambda}: mean {mean}"
            );
            assert!((var - lambda).abs() < 0.05 * lambda, "{lambda}: var {var}");
        }
    }

    #[test]
    fn forced_draws_are_order_independent_per_learner() {
        // With unit draws, learner 1 of OzaBoost over naive Bayes ends up with
        // the same statistics regardless of stream order.
        let stream: Vec<(SparseVector, Label)> = (0..40)
            .map(|i| {
                let v = ((i * 7) % 11) as f64 / 11.0 - 0.5;
                (sv(&[(1, v), (2, 0.3 - v / 2.0)]), if i % 3 == 0 { NEG } else { POS })
            })
            .collect();
        let run = |order: &[usize]| {
            let mut b = OzaBoost::new(3, WeakKind::NaiveBayes, 0)
                .unwrap()
                .with_poisson_mode(PoissonMode::AlwaysOne);
            for &i in order {
                b.process_example(&stream[i].0, stream[i].1).unwrap();
            }
            b
        };
        let fwd: Vec<usize> = (0..stream.len()).collect();
        let rev: Vec<usize> = fwd.iter().rev().copied().collect();
        let (a, b) = (run(&fwd), run(&rev));
        let (WeakLearnerState::NaiveBayes(na), WeakLearnerState::NaiveBayes(nb)) = (&a.learners()[0], &b.learners()[0])
        else {
            unreachable!()
        };
        cmp_nb(na, nb);
        // Same stream, same order: bit-identical counters.
        let c = run(&fwd);
        assert_eq!(a.lambda_correct(), c.lambda_correct());
        assert_eq!(a.lambda_wrong(), c.lambda_wrong());
    }

    fn cmp_nb(a: &NaiveBayes, b: &NaiveBayes) {
        for y in [POS, NEG] {
            assert!((a.class_weight(y) - b.class_weight(y)).abs() < 1e-9);
            for f in 1..=2 {
                let (s, s2, _) = a.accumulators(f, y);
                let (t, t2, _) = b.accumulators(f, y);
                assert!((s - t).abs() < 1e-9 && (s2 - t2).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn lambdas_stay_finite() {
        let mut b = OzaBoost::new(10, WeakKind::Perceptron, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let x = sv(&[(1, rng.gen_range(-0.7..0.7)), (2, rng.gen_range(-0.7..0.7))]);
            let y = if x.get(1) + 0.2 * rng.gen_range(-1.0..1.0) > 0.0 {
                POS
            } else {
                NEG
            };
            let (_, lambdas) = b.process_example(&x, y).unwrap();
            assert!(lambdas.iter().all(|l| l.is_finite() && *l > 0.0));
        }
    }

    #[test]
    fn single_learner_requires_prediction_first() {
        let mut s = SingleLearner::new(WeakKind::Perceptron);
        assert!(s.update(POS).is_err());
        assert_eq!(s.predict(&sv(&[(1, 0.2)])).unwrap(), POS);
        s.update(NEG).unwrap();
    }
}
