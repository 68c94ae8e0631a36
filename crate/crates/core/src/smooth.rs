//! The smooth online booster.
//!
//! For each example the booster first asks every weak learner for its
//! prediction `p_i` on the current hypothesis. After the label `y` is revealed
//! it walks the learners in order with a running edge
//! `z_i = z_{i-1} + y p_i - theta` (`z_0 = 0`): learner `i` is trained with
//! weight `w_i`, where `w_1 = 1` and `w_{i+1} = min((1 - gamma)^(z_i / 2), 1)`.
//! Examples the first `i` learners already cover with margin get exponentially
//! small weight for learner `i + 1`; examples they get wrong keep weight 1.
//!
//! The booster also tracks, per prefix level `i`, how many examples the prefix
//! average `(p_1 + ... + p_i) / i` failed to cover by `theta`. Together with the
//! per-learner weight totals this gives the smoothness certificate checked by
//! [`lemma2_check`].

use std::fmt::Write as _;

use crate::combine::{Combiner, ExpCombiner, ExpMode, OcpCombiner};
use crate::error::{BoostError, Result};
use crate::online::{check_unit_ball, OnlineClassifier};
use crate::sparse::{sign01, Label, SparseVector};
use crate::weak::{ExampleWeight, WeakKind, WeakLearner, WeakLearnerState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoosterParams {
    n: usize,
    gamma: f64,
    theta: f64,
}

impl BoosterParams {
    /// `theta` is derived as `gamma / (2 + gamma)`.
    pub fn new(n: usize, gamma: f64) -> Result<Self> {
        if n == 0 {
            return Err(BoostError::InvalidParams("need at least one weak learner".into()));
        }
        if !(gamma > 0.0 && gamma < 0.5) {
            return Err(BoostError::InvalidParams(format!("gamma {gamma} outside (0, 1/2)")));
        }
        Ok(Self {
            n,
            gamma,
            theta: gamma / (2.0 + gamma),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// `min((1 - gamma)^(z / 2), 1)`, evaluated as `exp((z / 2) ln(1 - gamma))`.
pub fn smooth_weight(z: f64, gamma: f64) -> ExampleWeight {
    if z <= 0.0 {
        return ExampleWeight::ONE;
    }
    ExampleWeight::clamped(((z / 2.0) * (1.0 - gamma).ln()).exp().min(1.0))
}

/// `(p_1 + ... + p_i) / i` for a 1-based level `i`.
pub fn prefix_vote(preds: &[f64], level: usize) -> Result<f64> {
    if level == 0 || level > preds.len() {
        return Err(BoostError::PrefixOutOfRange { level, n: preds.len() });
    }
    Ok(preds[..level].iter().sum::<f64>() / level as f64)
}

/// Everything the booster knew about one example.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundLog {
    /// 1-based position in the stream.
    pub t: u64,
    pub label: Label,
    pub prediction: Label,
    /// Weight handed to each of the N learners.
    pub weights: Vec<f64>,
    /// Weight a learner N + 1 would have received.
    pub tail_weight: f64,
    /// Cached pre-update weak predictions.
    pub preds: Vec<f64>,
    /// `y * f_i(x)` for every prefix level.
    pub prefix_margins: Vec<f64>,
}

impl RoundLog {
    /// Running edges `z_1..z_N`, accumulated in the same order as the booster.
    pub fn edges(&self, theta: f64) -> Vec<f64> {
        let y = self.label.sign();
        let mut z = 0.0;
        self.preds
            .iter()
            .map(|p| {
                z = z + y * p - theta;
                z
            })
            .collect()
    }

    /// `t,label,prediction,w1,p1,...,wN,pN`.
    pub fn csv_header(n: usize) -> String {
        let mut s = String::from("t,label,prediction");
        for i in 1..=n {
            let _ = write!(s, ",w{i},p{i}");
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{},{},{}", self.t, self.label.as_i32(), self.prediction.as_i32());
        for (w, p) in self.weights.iter().zip(&self.preds) {
            let _ = write!(s, ",{w},{p}");
        }
        s
    }
}

/// Runs the weight recursion on given weak predictions without any learner,
/// adding each weight to `cum` (length N + 1). The prediction recorded is the
/// uniform vote.
pub fn replay_round(t: u64, y: Label, preds: Vec<f64>, params: &BoosterParams, cum: &mut [f64]) -> RoundLog {
    let mut weights = Vec::new();
    let mut z = 0.0;
    let mut w = 1.0;
    let mut prefix = 0.0;
    let mut prefix_margins = Vec::new();
    for (i, p) in preds.iter().enumerate() {
        weights.push(w);
        cum[i] += w;
        z = z + y.sign() * p - params.theta();
        w = smooth_weight(z, params.gamma()).value();
        prefix += p;
        prefix_margins.push(y.sign() * prefix / (i + 1) as f64);
    }
    cum[preds.len()] += w;
    RoundLog {
        t,
        label: y,
        prediction: sign01(preds.iter().sum()),
        weights,
        tail_weight: w,
        preds,
        prefix_margins,
    }
}

/// Outcome of the prefix-ensemble smoothness check.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma2Report {
    /// Prefix level `k`: the largest level such that learners `1..=k` each
    /// received total weight at least `delta * T`, so learner `k + 1` received
    /// less. `None` when even the virtual learner N + 1 would have received
    /// that much, in which case N is too small for the certificate to say
    /// anything.
    pub level: Option<usize>,
    /// Examples with `y f_k(x) <= theta` at that level.
    pub margin_violations: u64,
    /// `delta * T`.
    pub threshold: f64,
    pub holds: bool,
}

/// Picks the level from weight totals `cum_weight[0..=N]` (the last entry
/// belongs to the virtual learner N + 1): `k` is the largest level with
/// `|w_i| >= delta T` for every `i <= k`, so `|w_{k+1}| < delta T`.
fn certificate_level(cum_weight: &[f64], threshold: f64) -> Option<usize> {
    let n = cum_weight.len() - 1;
    let k = cum_weight.iter().take_while(|&&w| w >= threshold).count();
    (k <= n).then_some(k.max(1))
}

/// Checks that fewer than `delta T` examples fall at or below `theta` at the
/// certificate level.
///
/// `cum_weight` holds the per-learner totals including the virtual learner
/// N + 1 (length N + 1).
pub fn lemma2_check(logs: &[RoundLog], cum_weight: &[f64], delta: f64, theta: f64) -> Result<Lemma2Report> {
    if logs.is_empty() {
        return Err(BoostError::InvalidParams("no rounds logged".into()));
    }
    let n = logs[0].preds.len();
    if cum_weight.len() != n + 1 {
        return Err(BoostError::InvalidParams(format!(
            "expected {} weight totals, got {}",
            n + 1,
            cum_weight.len()
        )));
    }
    let threshold = delta * logs.len() as f64;
    let Some(level) = certificate_level(cum_weight, threshold) else {
        return Ok(Lemma2Report {
            level: None,
            margin_violations: 0,
            threshold,
            holds: true,
        });
    };
    let violations = logs.iter().filter(|log| log.edges(theta)[level - 1] <= 0.0).count() as u64;
    Ok(Lemma2Report {
        level: Some(level),
        margin_violations: violations,
        threshold,
        holds: (violations as f64) < threshold,
    })
}

#[derive(Debug, Clone)]
struct Pending {
    x: SparseVector,
    preds: Vec<f64>,
    prediction: Label,
}

/// N weak learners trained with smooth weights, voting through a [`Combiner`].
#[derive(Debug, Clone)]
pub struct SmoothBooster {
    params: BoosterParams,
    learners: Vec<WeakLearnerState>,
    // N + 1 entries, the last for the virtual learner N + 1.
    cum_weight: Vec<f64>,
    // Rounds with z_i <= 0, per level.
    violations: Vec<u64>,
    examples_seen: u64,
    combiner: Combiner,
    pending: Option<Pending>,
    #[cfg(test)]
    frozen: Vec<bool>,
}

impl SmoothBooster {
    pub fn new(params: BoosterParams, weak: WeakKind, combiner: Combiner) -> Self {
        Self::with_learners(params, vec![weak.build(); params.n], combiner)
    }

    pub fn uniform(params: BoosterParams, weak: WeakKind) -> Self {
        Self::new(params, weak, Combiner::Uniform)
    }

    pub fn ocp(params: BoosterParams, weak: WeakKind) -> Self {
        let combiner = Combiner::Ocp(OcpCombiner::new(params.n, params.theta));
        Self::new(params, weak, combiner)
    }

    pub fn exp(params: BoosterParams, weak: WeakKind, seed: u64, mode: ExpMode) -> Self {
        let combiner = Combiner::Exp(ExpCombiner::new(params.n, seed, mode));
        Self::new(params, weak, combiner)
    }

    /// # Panics
    ///
    /// Panics if `learners.len()` differs from `params.n()`.
    pub fn with_learners(params: BoosterParams, learners: Vec<WeakLearnerState>, combiner: Combiner) -> Self {
        assert_eq!(learners.len(), params.n, "learner count must match N");
        Self {
            params,
            cum_weight: vec![0.0; params.n + 1],
            violations: vec![0; params.n],
            learners,
            examples_seen: 0,
            combiner,
            pending: None,
            #[cfg(test)]
            frozen: vec![false; params.n],
        }
    }

    pub fn params(&self) -> &BoosterParams {
        &self.params
    }

    pub fn learners(&self) -> &[WeakLearnerState] {
        &self.learners
    }

    pub fn combiner(&self) -> &Combiner {
        &self.combiner
    }

    /// Running `|w_i|` for the N real learners.
    pub fn cum_weight(&self) -> &[f64] {
        &self.cum_weight[..self.params.n]
    }

    /// Running `|w_i|` including the virtual learner N + 1.
    pub fn cum_weight_extended(&self) -> &[f64] {
        &self.cum_weight
    }

    pub fn examples_seen(&self) -> u64 {
        self.examples_seen
    }

    /// Smoothness certificate over everything seen so far, from the running
    /// counters rather than stored logs.
    pub fn lemma2(&self, delta: f64) -> Lemma2Report {
        let threshold = delta * self.examples_seen as f64;
        match certificate_level(&self.cum_weight, threshold) {
            Some(level) if self.examples_seen > 0 => {
                let v = self.violations[level - 1];
                Lemma2Report {
                    level: Some(level),
                    margin_violations: v,
                    threshold,
                    holds: (v as f64) < threshold,
                }
            }
            _ => Lemma2Report {
                level: None,
                margin_violations: 0,
                threshold,
                holds: true,
            },
        }
    }

    /// Predict, reveal the label and update in one call.
    pub fn process_example(&mut self, x: &SparseVector, y: Label) -> Result<RoundLog> {
        self.predict(x)?;
        self.update_logged(y)
    }

    /// Like [`OnlineClassifier::update`] but returns the round's record.
    pub fn update_logged(&mut self, y: Label) -> Result<RoundLog> {
        self.finish_round(y, true).map(|log| log.expect("requested"))
    }

    fn finish_round(&mut self, y: Label, record: bool) -> Result<Option<RoundLog>> {
        let Pending { x, preds, prediction } = self.pending.take().ok_or(BoostError::UpdateWithoutPrediction)?;
        self.combiner.update(&preds, y, prediction);

        let n = self.params.n;
        let (gamma, theta) = (self.params.gamma, self.params.theta);
        let mut weights = record.then(|| Vec::with_capacity(n));
        let mut z = 0.0;
        let mut w = ExampleWeight::ONE;
        for (i, learner) in self.learners.iter_mut().enumerate() {
            #[cfg(test)]
            let skip = self.frozen[i];
            #[cfg(not(test))]
            let skip = false;
            if !skip {
                learner.update(&x, y, w);
            }
            self.cum_weight[i] += w.value();
            if let Some(ws) = weights.as_mut() {
                ws.push(w.value());
            }
            // Cached prediction: the hypothesis that made it, not the one just updated.
            z = z + y.sign() * preds[i] - theta;
            if z <= 0.0 {
                self.violations[i] += 1;
            }
            w = smooth_weight(z, gamma);
        }
        self.cum_weight[n] += w.value();
        self.examples_seen += 1;

        Ok(weights.map(|weights| {
            let mut prefix = 0.0;
            let prefix_margins = preds
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    prefix += p;
                    y.sign() * prefix / (i + 1) as f64
                })
                .collect();
            RoundLog {
                t: self.examples_seen,
                label: y,
                prediction,
                weights,
                tail_weight: w.value(),
                preds,
                prefix_margins,
            }
        }))
    }
}

impl OnlineClassifier for SmoothBooster {
    fn predict(&mut self, x: &SparseVector) -> Result<Label> {
        check_unit_ball(x)?;
        let preds: Vec<f64> = self.learners.iter().map(|l| l.predict(x)).collect();
        let prediction = self.combiner.predict(&preds);
        self.pending = Some(Pending {
            x: x.clone(),
            preds,
            prediction,
        });
        Ok(prediction)
    }

    fn update(&mut self, y: Label) -> Result<()> {
        self.finish_round(y, false).map(drop)
    }
}
