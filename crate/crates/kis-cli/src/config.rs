//! key=value run configuration: file-supplied defaults that command-line
//! flags override. Unknown keys are rejected by name so typos cannot
//! silently fall back to defaults.

use std::path::{Path, PathBuf};

use crate::CliError;

/// One optional slot per recognized key; `None` means "not set here".
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub lambda: Option<f64>,
    pub c_min: Option<f64>,
    pub c_max: Option<f64>,
    pub k: Option<String>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub seeds: Option<u64>,
    pub learning_rate: Option<f64>,
    pub algorithm: Option<String>,
    pub leave_one_out: Option<bool>,
    pub ablate: Vec<String>,
    pub order: Option<usize>,
    pub add_k: Option<f64>,
    pub target: Option<f64>,
    pub input: Option<PathBuf>,
    pub inputs: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub pairs: Option<PathBuf>,
    pub lm: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub trace_out: Option<PathBuf>,
    pub coverage_scores: Option<PathBuf>,
}

fn bad_value(path: &Path, line: usize, key: &str, value: &str) -> CliError {
    CliError::Usage(format!(
        "{}: line {line}: invalid value {value:?} for key {key:?}",
        path.display()
    ))
}

/// Parse a UTF-8 key=value file; '#' starts a comment, blank lines are
/// skipped, and an unknown key is a usage error naming the key.
pub fn parse_file(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut cfg = RunConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let entry = raw.split('#').next().unwrap_or("").trim();
        if entry.is_empty() {
            continue;
        }
        let Some((key, value)) = entry.split_once('=') else {
            return Err(CliError::Usage(format!(
                "{}: line {line}: expected key=value, got {entry:?}",
                path.display()
            )));
        };
        let (key, value) = (key.trim(), value.trim());

        macro_rules! parse {
            ($ty:ty) => {
                Some(
                    value
                        .parse::<$ty>()
                        .map_err(|_| bad_value(path, line, key, value))?,
                )
            };
        }
        match key {
            "lambda" => cfg.lambda = parse!(f64),
            "c_min" => cfg.c_min = parse!(f64),
            "c_max" => cfg.c_max = parse!(f64),
            "k" => cfg.k = Some(value.to_string()),
            "steps" => cfg.steps = parse!(usize),
            "seed" => cfg.seed = parse!(u64),
            "seeds" => cfg.seeds = parse!(u64),
            "learning_rate" => cfg.learning_rate = parse!(f64),
            "algorithm" => cfg.algorithm = Some(value.to_string()),
            "leave_one_out" => cfg.leave_one_out = parse!(bool),
            "ablate" => {
                cfg.ablate = value
                    .split(',')
                    .map(|n| n.trim().to_string())
                    .filter(|n| !n.is_empty())
                    .collect();
            }
            "order" => cfg.order = parse!(usize),
            "add_k" => cfg.add_k = parse!(f64),
            "target" => cfg.target = parse!(f64),
            "input" => cfg.input = Some(PathBuf::from(value)),
            "inputs" => cfg.inputs = Some(PathBuf::from(value)),
            "corpus" => cfg.corpus = Some(PathBuf::from(value)),
            "pairs" => cfg.pairs = Some(PathBuf::from(value)),
            "lm" => cfg.lm = Some(PathBuf::from(value)),
            "out" => cfg.out = Some(PathBuf::from(value)),
            "trace_out" => cfg.trace_out = Some(PathBuf::from(value)),
            "coverage_scores" => cfg.coverage_scores = Some(PathBuf::from(value)),
            other => {
                return Err(CliError::Usage(format!(
                    "{}: line {line}: unknown config key {other:?}",
                    path.display()
                )));
            }
        }
    }
    Ok(cfg)
}
