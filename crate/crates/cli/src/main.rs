use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use osboost::harness::{emit_table, run_experiment, run_trial_logged, synthetic_stream};
use osboost::{
    BoostError, BoosterKind, Dataset, ExpMode, ExperimentConfig, LabelMap, OutputFormat, SyntheticKind, WeakKind,
};

#[derive(Parser)]
#[command(name = "boost", version, about = "Online boosting benchmarks on LIBSVM-format data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Md,
}

#[derive(Clone, Copy, ValueEnum)]
enum Exp {
    Randomized,
    Deterministic,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded progressive-validation trials and print a summary table.
    Run {
        /// LIBSVM file; may be given several times.
        #[arg(long, required = true)]
        data: Vec<PathBuf>,
        /// Extra label spellings, e.g. `0:-1` or `2:-1,4:+1`.
        #[arg(long, default_value = "")]
        label_map: String,
        #[arg(long, default_value = "osboost")]
        booster: String,
        #[arg(long, default_value = "perceptron")]
        weak: String,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        out: Format,
        /// Check the smoothness certificate each trial and fail if it breaks.
        #[arg(long)]
        diagnostics: bool,
        #[arg(long, default_value_t = 0.3)]
        delta: f64,
        /// How the EXP combiner turns expert weights into a prediction.
        #[arg(long, value_enum, default_value_t = Exp::Randomized)]
        exp_mode: Exp,
        /// Write the per-example round log of the first trial as CSV.
        #[arg(long)]
        round_log: Option<PathBuf>,
    },
    /// Write a synthetic linearly separable stream in LIBSVM format.
    Synth {
        #[arg(long, default_value = "margin")]
        kind: String,
        #[arg(long = "T", default_value_t = 5000)]
        t: usize,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file; standard output when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("boost: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), BoostError> {
    match cli.command {
        Command::Run {
            data,
            label_map,
            booster,
            weak,
            n,
            gamma,
            trials,
            seed,
            out,
            diagnostics,
            delta,
            exp_mode,
            round_log,
        } => {
            let labels: LabelMap = label_map.parse()?;
            let cfg = ExperimentConfig {
                booster: booster.parse::<BoosterKind>()?,
                weak: weak.parse::<WeakKind>()?,
                n,
                gamma,
                trials,
                base_seed: seed,
                diagnostics,
                delta,
                exp_mode: match exp_mode {
                    Exp::Randomized => ExpMode::Randomized,
                    Exp::Deterministic => ExpMode::Deterministic,
                },
            };
            cfg.validate()?;
            let mut summaries = Vec::new();
            for path in &data {
                let dataset = Dataset::load(path, &labels)?;
                if let Some(log_path) = &round_log {
                    let mut w = BufWriter::new(File::create(log_path)?);
                    run_trial_logged(&cfg, &dataset, seed, Some(&mut w))?;
                    w.flush()?;
                }
                summaries.push(run_experiment(&cfg, &dataset)?);
            }
            let format = match out {
                Format::Csv => OutputFormat::Csv,
                Format::Md => OutputFormat::Markdown,
            };
            print!("{}", emit_table(&summaries, format));
            if diagnostics {
                for s in &summaries {
                    for (trial, report) in s.trials.iter().filter_map(|t| t.lemma2.as_ref().map(|r| (t, r))) {
                        eprintln!(
                            "{} seed {}: level {:?}, {} margin violations, threshold {:.1}, holds",
                            s.dataset, trial.seed, report.level, report.margin_violations, report.threshold
                        );
                    }
                }
            }
            Ok(())
        }
        Command::Synth {
            kind,
            t,
            gamma,
            seed,
            output,
        } => {
            let data = synthetic_stream(kind.parse::<SyntheticKind>()?, t, gamma, seed)?;
            match output {
                Some(path) => {
                    let mut w = BufWriter::new(File::create(path)?);
                    data.write_libsvm(&mut w)?;
                    w.flush()?;
                }
                None => data.write_libsvm(io::stdout().lock())?,
            }
            Ok(())
        }
    }
}
