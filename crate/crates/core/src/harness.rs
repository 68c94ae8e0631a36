//! Seeded progressive-validation experiments and table output.
//!
//! Trial `i` of an experiment shuffles the dataset with seed `base + i`. Any
//! randomness inside a model (the EXP combiner's sampling, OzaBoost's Poisson
//! draws) uses `trial_seed.wrapping_add(MODEL_SEED_OFFSET)`, so a run is fully
//! determined by the configuration and the base seed.
//!
//! The diagnostics round log is CSV with header
//! `t,label,prediction,w1,p1,...,wN,pN`: the 1-based round, the true label,
//! the booster's committed prediction, then for each learner the weight it was
//! trained with and its pre-update prediction.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baseline::{OzaBoost, SingleLearner};
use crate::combine::{Combiner, ExpMode};
use crate::data::Dataset;
use crate::error::{BoostError, Result};
use crate::online::OnlineClassifier;
use crate::smooth::{BoosterParams, Lemma2Report, RoundLog, SmoothBooster};
use crate::sparse::{dot, Example, Label, SparseVector};
use crate::weak::WeakKind;

pub const MODEL_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoosterKind {
    Single,
    OsBoost,
    OsBoostOcp,
    OsBoostExp,
    OzaBoost,
}

impl BoosterKind {
    pub const ALL: [BoosterKind; 5] = [
        BoosterKind::Single,
        BoosterKind::OsBoost,
        BoosterKind::OsBoostOcp,
        BoosterKind::OsBoostExp,
        BoosterKind::OzaBoost,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoosterKind::Single => "single",
            BoosterKind::OsBoost => "osboost",
            BoosterKind::OsBoostOcp => "osboost-ocp",
            BoosterKind::OsBoostExp => "osboost-exp",
            BoosterKind::OzaBoost => "ozaboost",
        }
    }

    pub fn is_smooth(self) -> bool {
        matches!(
            self,
            BoosterKind::OsBoost | BoosterKind::OsBoostOcp | BoosterKind::OsBoostExp
        )
    }
}

impl fmt::Display for BoosterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoosterKind {
    type Err = BoostError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| BoostError::InvalidParams(format!("unknown booster `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = BoostError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "md" | "markdown" => Ok(OutputFormat::Markdown),
            _ => Err(BoostError::InvalidParams(format!("unknown output format `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub booster: BoosterKind,
    pub weak: WeakKind,
    pub n: usize,
    pub gamma: f64,
    pub trials: usize,
    pub base_seed: u64,
    pub diagnostics: bool,
    pub delta: f64,
    pub exp_mode: ExpMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            booster: BoosterKind::OsBoost,
            weak: WeakKind::Perceptron,
            n: 100,
            gamma: 0.1,
            trials: 5,
            base_seed: 0,
            diagnostics: false,
            delta: 0.3,
            exp_mode: ExpMode::Randomized,
        }
    }
}

impl ExperimentConfig {
    pub fn new(booster: BoosterKind, weak: WeakKind) -> Self {
        Self {
            booster,
            weak,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(BoostError::InvalidParams("trials must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(BoostError::InvalidParams(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        BoosterParams::new(self.n, self.gamma).map(drop)
    }

    pub fn build_model(&self, trial_seed: u64) -> Result<Model> {
        self.validate()?;
        let model_seed = trial_seed.wrapping_add(MODEL_SEED_OFFSET);
        let params = BoosterParams::new(self.n, self.gamma)?;
        Ok(match self.booster {
            BoosterKind::Single => Model::Single(SingleLearner::new(self.weak)),
            BoosterKind::OsBoost => Model::Smooth(SmoothBooster::uniform(params, self.weak)),
            BoosterKind::OsBoostOcp => Model::Smooth(SmoothBooster::ocp(params, self.weak)),
            BoosterKind::OsBoostExp => Model::Smooth(SmoothBooster::exp(params, self.weak, model_seed, self.exp_mode)),
            BoosterKind::OzaBoost => Model::Oza(OzaBoost::new(self.n, self.weak, model_seed)?),
        })
    }
}

/// Any of the classifiers an experiment can run.
#[derive(Debug, Clone)]
pub enum Model {
    Single(SingleLearner),
    Smooth(SmoothBooster),
    Oza(OzaBoost),
}

impl OnlineClassifier for Model {
    fn predict(&mut self, x: &SparseVector) -> Result<Label> {
        match self {
            Model::Single(m) => m.predict(x),
            Model::Smooth(m) => m.predict(x),
            Model::Oza(m) => m.predict(x),
        }
    }

    fn update(&mut self, y: Label) -> Result<()> {
        match self {
            Model::Single(m) => m.update(y),
            Model::Smooth(m) => m.update(y),
            Model::Oza(m) => m.update(y),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub seed: u64,
    pub mistakes: u64,
    pub t: u64,
    pub error_rate: f64,
    pub wall_time: Duration,
    /// Present for smooth boosters when diagnostics are on.
    pub lemma2: Option<Lemma2Report>,
    /// Per-expert mistake counts of the EXP combiner.
    pub expert_mistakes: Option<Vec<u64>>,
}

impl TrialResult {
    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &TrialResult) -> bool {
        self.seed == other.seed
            && self.mistakes == other.mistakes
            && self.t == other.t
            && self.lemma2 == other.lemma2
            && self.expert_mistakes == other.expert_mistakes
    }
}

pub fn run_trial(cfg: &ExperimentConfig, data: &Dataset, seed: u64) -> Result<TrialResult> {
    run_trial_logged(cfg, data, seed, None)
}

/// [`run_trial`] that also writes the round log of a smooth booster.
pub fn run_trial_logged(
    cfg: &ExperimentConfig,
    data: &Dataset,
    seed: u64,
    mut round_log: Option<&mut dyn Write>,
) -> Result<TrialResult> {
    if data.is_empty() {
        return Err(BoostError::EmptyDataset(data.name.clone()));
    }
    let mut model = cfg.build_model(seed)?;
    let stream = data.shuffle(seed);
    if let (Some(out), Model::Smooth(_)) = (round_log.as_mut(), &model) {
        writeln!(out, "{}", RoundLog::csv_header(cfg.n))?;
    }

    let start = Instant::now();
    let mut mistakes = 0;
    for Example { features, label } in &stream.examples {
        let prediction = model.predict(features)?;
        if prediction != *label {
            mistakes += 1;
        }
        match (&mut model, round_log.as_mut()) {
            (Model::Smooth(b), Some(out)) => writeln!(out, "{}", b.update_logged(*label)?.to_csv())?,
            (m, _) => m.update(*label)?,
        }
    }
    let wall_time = start.elapsed();

    let t = stream.len() as u64;
    let (lemma2, expert_mistakes) = match &model {
        Model::Smooth(b) => (
            cfg.diagnostics.then(|| b.lemma2(cfg.delta)),
            match b.combiner() {
                Combiner::Exp(c) => Some(c.expert_mistakes().to_vec()),
                _ => None,
            },
        ),
        _ => (None, None),
    };
    Ok(TrialResult {
        seed,
        mistakes,
        t,
        error_rate: mistakes as f64 / t as f64,
        wall_time,
        lemma2,
        expert_mistakes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub dataset: String,
    pub t: u64,
    pub booster: BoosterKind,
    pub weak: WeakKind,
    pub mean_error: f64,
    /// Sample standard deviation; zero for a single trial.
    pub std_error: f64,
    pub trials: Vec<TrialResult>,
}

impl ExperimentSummary {
    pub fn lemma2_reports(&self) -> impl Iterator<Item = &Lemma2Report> {
        self.trials.iter().filter_map(|t| t.lemma2.as_ref())
    }
}

/// Runs `cfg.trials` trials on separate threads. With diagnostics on, a
/// failed smoothness certificate in any trial turns the whole experiment into
/// an error.
pub fn run_experiment(cfg: &ExperimentConfig, data: &Dataset) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let seeds: Vec<u64> = (0..cfg.trials as u64).map(|i| cfg.base_seed.wrapping_add(i)).collect();
    let trials: Vec<TrialResult> = std::thread::scope(|s| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| s.spawn(move || run_trial(cfg, data, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("trial thread panicked"))
            .collect::<Result<_>>()
    })?;

    for trial in &trials {
        if let Some(report) = trial.lemma2.as_ref().filter(|r| !r.holds) {
            return Err(BoostError::Lemma2Violation(format!(
                "{} / {} / {} seed {}: {} margin violations at level {:?}, threshold {}",
                data.name, cfg.booster, cfg.weak, trial.seed, report.margin_violations, report.level, report.threshold
            )));
        }
    }

    let rates: Vec<f64> = trials.iter().map(|t| t.error_rate).collect();
    let (mean_error, std_error) = mean_std(&rates);
    Ok(ExperimentSummary {
        dataset: data.name.clone(),
        t: data.len() as u64,
        booster: cfg.booster,
        weak: cfg.weak,
        mean_error,
        std_error,
        trials,
    })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub const TABLE_COLUMNS: [&str; 6] = ["dataset", "T", "booster", "weak", "mean_error", "std"];

/// One row per summary, columns in [`TABLE_COLUMNS`] order.
pub fn emit_table(summaries: &[ExperimentSummary], format: OutputFormat) -> String {
    let rows = summaries.iter().map(|s| {
        [
            s.dataset.clone(),
            s.t.to_string(),
            s.booster.to_string(),
            s.weak.to_string(),
            format!("{:.4}", s.mean_error),
            format!("{:.4}", s.std_error),
        ]
    });
    let mut out = String::new();
    match format {
        OutputFormat::Csv => {
            out.push_str(&TABLE_COLUMNS.join(","));
            out.push('\n');
            for row in rows {
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        OutputFormat::Markdown => {
            out.push_str(&format!("| {} |\n", TABLE_COLUMNS.join(" | ")));
            out.push_str(&format!("|{}\n", "---|".repeat(TABLE_COLUMNS.len())));
            for row in rows {
                out.push_str(&format!("| {} |\n", row.join(" | ")));
            }
        }
    }
    out
}

/// Mean errors with one row per dataset and one column per booster and weak
/// learner pair. Missing combinations are left blank.
pub fn emit_pivot_markdown(summaries: &[ExperimentSummary]) -> String {
    let mut datasets: Vec<&str> = Vec::new();
    let mut columns: Vec<(BoosterKind, WeakKind)> = Vec::new();
    for s in summaries {
        if !datasets.contains(&s.dataset.as_str()) {
            datasets.push(&s.dataset);
        }
        if !columns.contains(&(s.booster, s.weak)) {
            columns.push((s.booster, s.weak));
        }
    }
    let mut out = String::from("| dataset |");
    for (b, w) in &columns {
        out.push_str(&format!(" {b} ({w}) |"));
    }
    out.push_str(&format!("\n|---|{}\n", "---|".repeat(columns.len())));
    for d in datasets {
        out.push_str(&format!("| {d} |"));
        for &(b, w) in &columns {
            let cell = summaries
                .iter()
                .find(|s| s.dataset == d && s.booster == b && s.weak == w)
                .map(|s| format!("{:.4}", s.mean_error))
                .unwrap_or_default();
            out.push_str(&format!(" {cell} |"));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    Margin,
    NoisyMargin,
}

impl FromStr for SyntheticKind {
    type Err = BoostError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "margin" => Ok(SyntheticKind::Margin),
            "noisy-margin" => Ok(SyntheticKind::NoisyMargin),
            _ => Err(BoostError::InvalidParams(format!("unknown synthetic stream `{s}`"))),
        }
    }
}

pub const SYNTH_DIM: u32 = 8;
pub const SYNTH_FLIP_RATE: f64 = 0.05;

/// The separator used by [`synthetic_stream`] for a given seed.
pub fn synthetic_separator(seed: u64) -> SparseVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = gaussian_vector(&mut rng);
    h.scaled(1.0 / h.norm())
}

/// `t` points drawn uniformly from the unit ball and kept only when
/// `|<h*, x>| >= 3 * gamma`, labeled by the side of `h*` they fall on. The
/// noisy variant then flips each label with probability 0.05.
pub fn synthetic_stream(kind: SyntheticKind, t: usize, gamma: f64, seed: u64) -> Result<Dataset> {
    if t == 0 {
        return Err(BoostError::InvalidParams("synthetic stream needs T >= 1".into()));
    }
    if !(gamma > 0.0 && 3.0 * gamma < 1.0) {
        return Err(BoostError::InvalidParams(format!(
            "no unit-ball point has margin 3 * {gamma} against a unit separator"
        )));
    }
    let h = synthetic_separator(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut examples = Vec::with_capacity(t);
    while examples.len() < t {
        let g = gaussian_vector(&mut rng);
        let radius = rng.gen::<f64>().powf(1.0 / SYNTH_DIM as f64);
        let x = g.scaled(radius / g.norm());
        let m = dot(&h, &x);
        if m.abs() < 3.0 * gamma {
            continue;
        }
        let mut y = if m > 0.0 { Label::Positive } else { Label::Negative };
        if kind == SyntheticKind::NoisyMargin && rng.gen_bool(SYNTH_FLIP_RATE) {
            y = y.flipped();
        }
        examples.push(Example::new(x, y));
    }
    let name = match kind {
        SyntheticKind::Margin => "synthetic-margin",
        SyntheticKind::NoisyMargin => "synthetic-noisy-margin",
    };
    Ok(Dataset::new(name, examples))
}

fn gaussian_vector<R: Rng>(rng: &mut R) -> SparseVector {
    loop {
        let pairs = (1..=SYNTH_DIM).map(|i| {
            // Box-Muller; 1 - u keeps the log finite.
            let (u, v): (f64, f64) = (1.0 - rng.gen::<f64>(), rng.gen());
            (i, (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos())
        });
        let g = SparseVector::from_pairs(pairs).expect("indices are distinct");
        if g.norm() > 0.0 {
            return g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(pairs: &[(u32, f64)]) -> SparseVector {
        SparseVector::from_pairs(pairs.iter().copied()).unwrap()
    }

    fn toy(n: usize) -> Dataset {
        let examples = (0..n)
            .map(|i| {
                let v = (i as f64 * 0.37).sin() * 0.6;
                Example::new(
                    sv(&[(1, v), (2, 0.3)]),
                    if v > 0.1 { Label::Positive } else { Label::Negative },
                )
            })
            .collect();
        Dataset::new("toy", examples)
    }

    #[test]
    fn all_positive_single_perceptron_is_perfect() {
        let data = Dataset::new(
            "pos",
            (0..50)
                .map(|i| Example::new(sv(&[(1, 0.01 * i as f64)]), Label::Positive))
                .collect(),
        );
        let cfg = ExperimentConfig::new(BoosterKind::Single, WeakKind::Perceptron);
        assert_eq!(run_trial(&cfg, &data, 3).unwrap().mistakes, 0);
    }

    #[test]
    fn equal_seeds_equal_results() {
        let data = toy(120);
        for booster in BoosterKind::ALL {
            let cfg = ExperimentConfig {
                n: 7,
                diagnostics: true,
                ..ExperimentConfig::new(booster, WeakKind::NaiveBayes)
            };
            let a = run_trial(&cfg, &data, 11).unwrap();
            let b = run_trial(&cfg, &data, 11).unwrap();
            assert!(a.same_outcome(&b), "{booster}");
            assert!((0.0..=1.0).contains(&a.error_rate));
            assert_eq!(a.lemma2.is_some(), booster.is_smooth());
            assert_eq!(a.expert_mistakes.is_some(), booster == BoosterKind::OsBoostExp);
        }
    }

    #[test]
    fn experiment_aggregates_exactly() {
        let data = toy(80);
        let cfg = ExperimentConfig {
            n: 5,
            trials: 1,
            base_seed: 9,
            ..ExperimentConfig::default()
        };
        let s = run_experiment(&cfg, &data).unwrap();
        assert_eq!(s.mean_error, s.trials[0].error_rate);
        assert_eq!(s.std_error, 0.0);

        let cfg = ExperimentConfig { trials: 4, ..cfg };
        let s = run_experiment(&cfg, &data).unwrap();
        let seeds: Vec<u64> = s.trials.iter().map(|t| t.seed).collect();
        assert_eq!(seeds, vec![9, 10, 11, 12]);
        let mean = s.trials.iter().map(|t| t.error_rate).sum::<f64>() / 4.0;
        assert_eq!(s.mean_error, mean);
        for t in &s.trials {
            assert!(t.same_outcome(&run_trial(&cfg, &data, t.seed).unwrap()));
        }
    }

    #[test]
    fn config_validation() {
        let bad = [
            ExperimentConfig {
                trials: 0,
                ..Default::default()
            },
            ExperimentConfig {
                n: 0,
                ..Default::default()
            },
            ExperimentConfig {
                gamma: 0.5,
                ..Default::default()
            },
            ExperimentConfig {
                gamma: 0.0,
                ..Default::default()
            },
            ExperimentConfig {
                delta: 1.0,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        assert!(run_trial(&ExperimentConfig::default(), &Dataset::new("e", vec![]), 0).is_err());
    }

    #[test]
    fn names_round_trip() {
        for b in BoosterKind::ALL {
            assert_eq!(b.name().parse::<BoosterKind>().unwrap(), b);
        }
        assert!("ogboost".parse::<BoosterKind>().is_err());
        assert_eq!("md".parse::<OutputFormat>().unwrap(), OutputFormat::Markdown);
    }

    fn summary(dataset: &str, booster: BoosterKind) -> ExperimentSummary {
        ExperimentSummary {
            dataset: dataset.into(),
            t: 270,
            booster,
            weak: WeakKind::Perceptron,
            mean_error: 0.25,
            std_error: 0.01,
            trials: vec![],
        }
    }

    #[test]
    fn table_schema() {
        assert_eq!(
            emit_table(&[], OutputFormat::Csv),
            "dataset,T,booster,weak,mean_error,std\n"
        );
        let md = emit_table(&[], OutputFormat::Markdown);
        assert_eq!(md.lines().count(), 2);
        let csv = emit_table(&[summary("heart", BoosterKind::OsBoost)], OutputFormat::Csv);
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "heart,270,osboost,perceptron,0.2500,0.0100"
        );
        let md = emit_table(&[summary("heart", BoosterKind::OsBoost)], OutputFormat::Markdown);
        assert_eq!(
            md.lines().nth(2).unwrap(),
            "| heart | 270 | osboost | perceptron | 0.2500 | 0.0100 |"
        );

        let pivot = emit_pivot_markdown(&[
            summary("heart", BoosterKind::Single),
            summary("heart", BoosterKind::OsBoost),
            summary("german", BoosterKind::Single),
        ]);
        let lines: Vec<&str> = pivot.lines().collect();
        assert_eq!(lines[0], "| dataset | single (perceptron) | osboost (perceptron) |");
        assert_eq!(lines[3], "| german | 0.2500 |  |");
    }

    #[test]
    fn synthetic_margin_invariant() {
        for kind in [SyntheticKind::Margin, SyntheticKind::NoisyMargin] {
            let data = synthetic_stream(kind, 2000, 0.1, 5).unwrap();
            let h = synthetic_separator(5);
            assert_eq!(data.len(), 2000);
            let mut flipped = 0;
            for e in &data.examples {
                assert!(e.features.norm() <= 1.0 + 1e-12);
                let m = dot(&h, &e.features);
                assert!(m.abs() >= 0.3);
                if e.label.sign() * m < 0.0 {
                    flipped += 1;
                }
            }
            match kind {
                SyntheticKind::Margin => assert_eq!(flipped, 0),
                SyntheticKind::NoisyMargin => assert!((60..=140).contains(&flipped), "{flipped}"),
            }
        }
        assert!(synthetic_stream(SyntheticKind::Margin, 0, 0.1, 1).is_err());
        assert!(synthetic_stream(SyntheticKind::Margin, 10, 0.34, 1).is_err());
        assert_eq!(
            synthetic_stream(SyntheticKind::Margin, 50, 0.1, 3).unwrap(),
            synthetic_stream(SyntheticKind::Margin, 50, 0.1, 3).unwrap()
        );
    }

    #[test]
    fn round_log_csv_has_one_row_per_example() {
        let data = toy(30);
        let cfg = ExperimentConfig {
            n: 3,
            ..ExperimentConfig::default()
        };
        let mut buf = Vec::new();
        run_trial_logged(&cfg, &data, 1, Some(&mut buf)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 31);
        assert_eq!(lines[0], "t,label,prediction,w1,p1,w2,p2,w3,p3");
        assert!(lines[1].starts_with("1,"));
        assert_eq!(lines[30].split(',').count(), 9);
    }
}
