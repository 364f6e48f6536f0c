//! Batch front door for the simplification toolkit: pair scoring, corpus
//! evaluation, language-model building, lambda calibration, toy-policy
//! training, and the k-comparison experiment.
//!
//! Every command is deterministic given its config and seed; reruns
//! produce byte-identical outputs. Exit codes: 0 success, 1 usage error,
//! 2 data error, 3 internal error.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::RunConfig;

/// Process-level error; the variant fixes the exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config keys, or parameter combinations (exit 1).
    Usage(String),
    /// Missing or malformed input data (exit 2).
    Data(String),
    /// Broken internal invariants (exit 3).
    Internal(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<kis::KisError> for CliError {
    fn from(e: kis::KisError) -> Self {
        use kis::KisError::*;
        match e {
            InvalidConfig(_) => CliError::Usage(e.to_string()),
            Parse(_) | EmptyInput | EmptyCorpus | NoWords | NoReferences | NoMaskableTokens
            | Unreachable { .. } | Io(_) => CliError::Data(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "kis", version, about = "Unsupervised text-simplification toolkit")]
pub struct Cli {
    /// key=value defaults file; command-line flags win
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// base RNG seed for commands that sample
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// candidate population size; comma-separated list where one applies
    #[arg(long, global = true, value_name = "LIST")]
    k: Option<String>,
    /// training steps
    #[arg(long, global = true, value_name = "N")]
    steps: Option<usize>,
    /// fluency ramp scale
    #[arg(long, global = true, value_name = "X")]
    lambda: Option<f64>,
    /// drop a reward component: simplicity, fluency, or salience (repeatable)
    #[arg(long, global = true, value_name = "NAME")]
    ablate: Vec<String>,
    /// JSON map of record id to external coverage value (score only)
    #[arg(long, global = true, value_name = "PATH")]
    coverage_scores: Option<PathBuf>,
    /// output path; stdout when omitted
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score original→simplified pairs, one reward report JSON per line
    Score {
        /// JSONL of {"id", "original", "simplified"} records
        #[arg(value_name = "INPUT")]
        input: Option<PathBuf>,
    },
    /// Aggregate corpus metrics: SARI, BLEU, %FKGL, compression, coverage
    Evaluate {
        /// JSONL records, optionally with a "references" list
        #[arg(value_name = "INPUT")]
        input: Option<PathBuf>,
        /// fail when references are missing instead of omitting SARI/BLEU
        #[arg(long)]
        sari: bool,
    },
    /// Train an n-gram language model from one-paragraph-per-line text
    BuildLm {
        #[arg(long, value_name = "PATH")]
        corpus: Option<PathBuf>,
        /// n-gram order
        #[arg(long, value_name = "N")]
        order: Option<usize>,
        /// additive smoothing constant
        #[arg(long, value_name = "X")]
        add_k: Option<f64>,
    },
    /// Find the smallest lambda reaching a target mean fluency score
    CalibrateLambda {
        /// JSONL of {"id", "original", "simplified"} calibration pairs
        #[arg(long, value_name = "PATH")]
        pairs: Option<PathBuf>,
        /// serialized language model; bundled default when omitted
        #[arg(long, value_name = "PATH")]
        lm: Option<PathBuf>,
        /// target mean fluency score in (0, 1)
        #[arg(long, value_name = "X")]
        target: Option<f64>,
    },
    /// Train the toy substitution policy on the composite reward
    TrainToy {
        #[arg(long, value_name = "X")]
        learning_rate: Option<f64>,
        /// scst (greedy baseline) or kscst (mean-of-k baseline)
        #[arg(long, value_name = "NAME")]
        algorithm: Option<String>,
        /// exclude each candidate's own reward from its baseline
        #[arg(long)]
        leave_one_out: bool,
        /// one input paragraph per line; bundled toy inputs when omitted
        #[arg(long, value_name = "PATH")]
        inputs: Option<PathBuf>,
    },
    /// Train across k values and seeds and tabulate mean-reward curves
    CompareScst {
        /// number of seeds, numbered up from the base seed
        #[arg(long, value_name = "N")]
        seeds: Option<u64>,
        #[arg(long, value_name = "X")]
        learning_rate: Option<f64>,
        /// one input paragraph per line; bundled toy inputs when omitted
        #[arg(long, value_name = "PATH")]
        inputs: Option<PathBuf>,
        /// also write the raw per-run trace CSV here
        #[arg(long, value_name = "PATH")]
        trace_out: Option<PathBuf>,
    },
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => config::parse_file(path)?,
        None => RunConfig::default(),
    };
    match &cli.command {
        Command::Score { input } => commands::score(cli, &cfg, input.as_deref()),
        Command::Evaluate { input, sari } => commands::evaluate(cli, &cfg, input.as_deref(), *sari),
        Command::BuildLm { corpus, order, add_k } => {
            commands::build_lm(cli, &cfg, corpus.as_deref(), *order, *add_k)
        }
        Command::CalibrateLambda { pairs, lm, target } => {
            commands::calibrate(cli, &cfg, pairs.as_deref(), lm.as_deref(), *target)
        }
        Command::TrainToy {
            learning_rate,
            algorithm,
            leave_one_out,
            inputs,
        } => commands::train_toy(
            cli,
            &cfg,
            *learning_rate,
            algorithm.as_deref(),
            *leave_one_out,
            inputs.as_deref(),
        ),
        Command::CompareScst {
            seeds,
            learning_rate,
            inputs,
            trace_out,
        } => commands::compare_scst(
            cli,
            &cfg,
            *seeds,
            *learning_rate,
            inputs.as_deref(),
            trace_out.as_deref(),
        ),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits 2 on usage errors by convention; this tool
            // reserves 2 for data errors, so remap to 1.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}
