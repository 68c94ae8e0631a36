//! Online boosting with smooth example weights.
//!
//! A [`SmoothBooster`] runs N online weak learners in sequence. Each learner
//! is trained on the current example with a weight in `[0, 1]` that shrinks
//! geometrically once the learners before it already classify the example
//! with a comfortable margin. The final prediction is a uniform vote, a vote
//! weighted by online convex programming over the simplex ([`OcpCombiner`]),
//! or a Hedge-style choice among the N prefix ensembles ([`ExpCombiner`]).
//!
//! Everything is evaluated through [`OnlineClassifier`], whose separate
//! `predict` and `update` calls make it impossible to see a label before the
//! prediction for that example is committed.
//!
//! ```
//! use osboost::{BoosterParams, Label, OnlineClassifier, SmoothBooster, SparseVector, WeakKind};
//!
//! let params = BoosterParams::new(10, 0.1).unwrap();
//! let mut booster = SmoothBooster::uniform(params, WeakKind::Perceptron);
//! let x = SparseVector::from_pairs([(1, 0.5), (3, -0.2)]).unwrap();
//! let guess = booster.predict(&x).unwrap();
//! booster.update(Label::Negative).unwrap();
//! assert_eq!(guess, Label::Positive);
//! ```

pub mod baseline;
pub mod combine;
pub mod data;
pub mod error;
pub mod harness;
pub mod online;
pub mod smooth;
pub mod sparse;
pub mod weak;

pub use baseline::{OzaBoost, PoissonMode, SingleLearner};
pub use combine::{project_simplex, AlphaVector, Combiner, ExpCombiner, ExpMode, OcpCombiner};
pub use data::{Dataset, LabelMap};
pub use error::{BoostError, Result};
pub use harness::{
    emit_table, run_experiment, run_trial, synthetic_stream, BoosterKind, ExperimentConfig, ExperimentSummary,
    OutputFormat, SyntheticKind, TrialResult,
};
pub use online::OnlineClassifier;
pub use smooth::{lemma2_check, replay_round, smooth_weight, BoosterParams, Lemma2Report, RoundLog, SmoothBooster};
pub use sparse::{dot, sign01, Example, Label, SparseVector};
pub use weak::{ExampleWeight, NaiveBayes, OcpLinear, Perceptron, WeakKind, WeakLearner, WeakLearnerState};
