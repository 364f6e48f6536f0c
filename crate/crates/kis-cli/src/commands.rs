//! Command implementations. Each merges flags over config-file values,
//! builds its models, and writes deterministic output (stdout or --out).

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use kis::bundled;
use kis::evalmetrics::{corpus_report, EvalRecord};
use kis::fluency::{calibrate_lambda, train_ngram_lm_from_reader, LanguageModel, NGramLM};
use kis::kscst::{compare_k, train, Algorithm, ToyLexicalPolicy, TrainerConfig};
use kis::reward::{score_pair, ComponentToggles, ScoreConfig};
use kis::salience::{CoverageModel, MaskedDoc};
use kis::textproc::{tokenize, StopwordList, TokenizedText};

use crate::config::RunConfig;
use crate::{Cli, CliError};

fn data_at(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

/// Re-attach the source path to a data error; other classes pass through.
fn contextualize(path: &Path, e: kis::KisError) -> CliError {
    match CliError::from(e) {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    }
}

fn write_output(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| data_at(path, e)),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// JSONL records with their 1-based line numbers; blank lines skipped.
fn read_records(path: &Path) -> Result<Vec<(usize, EvalRecord)>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| data_at(path, e))?;
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: EvalRecord = serde_json::from_str(line)
            .map_err(|e| CliError::Data(format!("{}: line {}: {e}", path.display(), idx + 1)))?;
        records.push((idx + 1, record));
    }
    Ok(records)
}

fn toggles_from(cli: &Cli, cfg: &RunConfig) -> Result<ComponentToggles, CliError> {
    let names = if cli.ablate.is_empty() {
        &cfg.ablate
    } else {
        &cli.ablate
    };
    let mut toggles = ComponentToggles::default();
    for name in names {
        match name.as_str() {
            "simplicity" => toggles.use_simplicity = false,
            "fluency" => toggles.use_fluency = false,
            "salience" => toggles.use_salience = false,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown ablation {other:?}: expected simplicity, fluency, or salience"
                )));
            }
        }
    }
    Ok(toggles)
}

fn build_score_config(cli: &Cli, cfg: &RunConfig) -> Result<ScoreConfig, CliError> {
    let lm: Arc<dyn LanguageModel> = match &cfg.lm {
        Some(path) => Arc::new(NGramLM::load_from_path(path).map_err(|e| contextualize(path, e))?),
        None => bundled::default_lm(),
    };
    let mut score = ScoreConfig::with_lm(lm);
    if let Some(lambda) = cli.lambda.or(cfg.lambda) {
        score.lambda = lambda;
    }
    if let Some(c_min) = cfg.c_min {
        score.brevity_bounds.c_min = c_min;
    }
    if let Some(c_max) = cfg.c_max {
        score.brevity_bounds.c_max = c_max;
    }
    score.toggles = toggles_from(cli, cfg)?;
    score.validate()?;
    Ok(score)
}

/// External per-record coverage, injected in place of the cloze model.
struct FixedCoverage(f64);

impl CoverageModel for FixedCoverage {
    fn fill_accuracy(&self, _masked: &MaskedDoc, _evidence: &TokenizedText) -> f64 {
        self.0
    }
}

fn load_coverage_scores(path: &Path) -> Result<BTreeMap<String, f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| data_at(path, e))?;
    let map: BTreeMap<String, f64> =
        serde_json::from_str(&text).map_err(|e| data_at(path, e))?;
    for (id, value) in &map {
        if !(0.0..=1.0).contains(value) {
            return Err(CliError::Data(format!(
                "{}: coverage for {id:?} is {value}, outside [0, 1]",
                path.display()
            )));
        }
    }
    Ok(map)
}

pub fn score(cli: &Cli, cfg: &RunConfig, input: Option<&Path>) -> Result<(), CliError> {
    let input = input
        .map(PathBuf::from)
        .or_else(|| cfg.input.clone())
        .ok_or_else(|| CliError::Usage("score: no input JSONL given".into()))?;
    let records = read_records(&input)?;
    if records.is_empty() {
        return Err(CliError::Data(format!("{}: no records", input.display())));
    }
    let overrides = match cli.coverage_scores.as_ref().or(cfg.coverage_scores.as_ref()) {
        Some(path) => load_coverage_scores(path)?,
        None => BTreeMap::new(),
    };
    let base = build_score_config(cli, cfg)?;

    let mut out = String::new();
    for (line, record) in &records {
        let score_cfg = match overrides.get(&record.id) {
            Some(&value) => {
                let mut with_fixed = base.clone();
                with_fixed.coverage_model = Arc::new(FixedCoverage(value));
                with_fixed
            }
            None => base.clone(),
        };
        let report = score_pair(&record.original, &record.output, &score_cfg).map_err(|e| {
            match CliError::from(e) {
                CliError::Data(m) => {
                    CliError::Data(format!("{}: line {line}: {m}", input.display()))
                }
                other => other,
            }
        })?;
        let json =
            serde_json::to_string(&report).map_err(|e| CliError::Internal(e.to_string()))?;
        out.push_str(&json);
        out.push('\n');
    }
    write_output(cli.out.as_deref().or(cfg.out.as_deref()), &out)
}

pub fn evaluate(
    cli: &Cli,
    cfg: &RunConfig,
    input: Option<&Path>,
    require_references: bool,
) -> Result<(), CliError> {
    if cli.coverage_scores.is_some() || cfg.coverage_scores.is_some() {
        return Err(CliError::Usage(
            "evaluate: --coverage-scores applies to score only".into(),
        ));
    }
    let input = input
        .map(PathBuf::from)
        .or_else(|| cfg.input.clone())
        .ok_or_else(|| CliError::Usage("evaluate: no input JSONL given".into()))?;
    let records: Vec<EvalRecord> = read_records(&input)?
        .into_iter()
        .map(|(_, record)| record)
        .collect();
    let score = build_score_config(cli, cfg)?;
    let report = corpus_report(&records, &score).map_err(|e| contextualize(&input, e))?;
    if require_references && report.sari.is_none() {
        return Err(contextualize(&input, kis::KisError::NoReferences));
    }
    let mut json =
        serde_json::to_string(&report).map_err(|e| CliError::Internal(e.to_string()))?;
    json.push('\n');
    write_output(cli.out.as_deref().or(cfg.out.as_deref()), &json)
}

pub fn build_lm(
    cli: &Cli,
    cfg: &RunConfig,
    corpus: Option<&Path>,
    order: Option<usize>,
    add_k: Option<f64>,
) -> Result<(), CliError> {
    let corpus = corpus
        .map(PathBuf::from)
        .or_else(|| cfg.corpus.clone())
        .ok_or_else(|| CliError::Usage("build-lm: no --corpus given".into()))?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .ok_or_else(|| CliError::Usage("build-lm: --out is required".into()))?;
    let order = order.or(cfg.order).unwrap_or(3);
    let add_k = add_k.or(cfg.add_k).unwrap_or(0.1);

    let file = fs::File::open(&corpus).map_err(|e| data_at(&corpus, e))?;
    let lm = train_ngram_lm_from_reader(
        BufReader::new(file),
        order,
        add_k,
        StopwordList::bundled(),
    )
    .map_err(|e| contextualize(&corpus, e))?;
    lm.save_to_path(&out).map_err(|e| contextualize(&out, e))?;

    let summary = serde_json::json!({
        "add_k": lm.add_k(),
        "corpus": corpus.display().to_string(),
        "order": lm.order(),
        "out": out.display().to_string(),
        "vocab": lm.vocab_size(),
    });
    println!("{summary}");
    Ok(())
}

pub fn calibrate(
    cli: &Cli,
    cfg: &RunConfig,
    pairs: Option<&Path>,
    lm: Option<&Path>,
    target: Option<f64>,
) -> Result<(), CliError> {
    let pairs_path = pairs
        .map(PathBuf::from)
        .or_else(|| cfg.pairs.clone())
        .ok_or_else(|| CliError::Usage("calibrate-lambda: no --pairs given".into()))?;
    let records = read_records(&pairs_path)?;
    if records.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no records",
            pairs_path.display()
        )));
    }
    let stopwords = StopwordList::bundled();
    let mut tokenized = Vec::with_capacity(records.len());
    for (line, record) in &records {
        let p = tokenize(&record.original, stopwords).map_err(|e| {
            CliError::Data(format!("{}: line {line}: {e}", pairs_path.display()))
        })?;
        let q = tokenize(&record.output, stopwords).map_err(|e| {
            CliError::Data(format!("{}: line {line}: {e}", pairs_path.display()))
        })?;
        tokenized.push((p, q));
    }
    let model: Arc<dyn LanguageModel> = match lm.map(PathBuf::from).or_else(|| cfg.lm.clone()) {
        Some(path) => {
            Arc::new(NGramLM::load_from_path(&path).map_err(|e| contextualize(&path, e))?)
        }
        None => bundled::default_lm(),
    };
    let target = target.or(cfg.target).unwrap_or(0.9);
    let lambda = calibrate_lambda(&tokenized, model.as_ref(), target)?;

    let summary = serde_json::json!({
        "lambda": lambda,
        "pairs": tokenized.len(),
        "target": target,
    });
    write_output(
        cli.out.as_deref().or(cfg.out.as_deref()),
        &format!("{summary}\n"),
    )
}

/// Inputs for training: a file of paragraphs, or the bundled toy set.
fn load_inputs(path: Option<&Path>) -> Result<Vec<TokenizedText>, CliError> {
    let Some(path) = path else {
        return Ok(bundled::toy_inputs().to_vec());
    };
    let text = fs::read_to_string(path).map_err(|e| data_at(path, e))?;
    let stopwords = StopwordList::bundled();
    let mut docs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc = tokenize(line, stopwords)
            .map_err(|e| CliError::Data(format!("{}: line {}: {e}", path.display(), idx + 1)))?;
        docs.push(doc);
    }
    if docs.is_empty() {
        return Err(CliError::Data(format!("{}: no inputs", path.display())));
    }
    Ok(docs)
}

fn parse_k_values(raw: Option<&str>) -> Result<Option<Vec<usize>>, CliError> {
    let Some(raw) = raw else { return Ok(None) };
    let values = raw
        .split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<usize>()
                .map_err(|_| CliError::Usage(format!("invalid k value {part:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(CliError::Usage("empty k list".into()));
    }
    Ok(Some(values))
}

fn ablation_label(toggles: &ComponentToggles) -> String {
    let mut dropped = Vec::new();
    if !toggles.use_simplicity {
        dropped.push("simplicity");
    }
    if !toggles.use_fluency {
        dropped.push("fluency");
    }
    if !toggles.use_salience {
        dropped.push("salience");
    }
    dropped.join(",")
}

pub fn train_toy(
    cli: &Cli,
    cfg: &RunConfig,
    learning_rate: Option<f64>,
    algorithm: Option<&str>,
    leave_one_out: bool,
    inputs: Option<&Path>,
) -> Result<(), CliError> {
    let k_values = parse_k_values(cli.k.as_deref().or(cfg.k.as_deref()))?;
    let k = match k_values.as_deref() {
        None => 8,
        Some([k]) => *k,
        Some(list) => {
            return Err(CliError::Usage(format!(
                "train-toy takes a single k, got {list:?}"
            )));
        }
    };
    let algorithm_name = algorithm
        .map(str::to_string)
        .or_else(|| cfg.algorithm.clone())
        .unwrap_or_else(|| "kscst".to_string());
    let algorithm = match algorithm_name.as_str() {
        "kscst" => Algorithm::Kscst,
        "scst" => Algorithm::Scst,
        other => {
            return Err(CliError::Usage(format!(
                "unknown algorithm {other:?}: expected scst or kscst"
            )));
        }
    };
    let trainer = TrainerConfig {
        k,
        learning_rate: learning_rate
            .or(cfg.learning_rate)
            .unwrap_or_else(|| TrainerConfig::default().learning_rate),
        steps: cli.steps.or(cfg.steps).unwrap_or(500),
        seed: cli.seed.or(cfg.seed).unwrap_or(0),
        algorithm,
        leave_one_out: leave_one_out || cfg.leave_one_out.unwrap_or(false),
    };

    let docs = load_inputs(inputs.or(cfg.inputs.as_deref()))?;
    let score = build_score_config(cli, cfg)?;
    let ablate = ablation_label(&score.toggles);
    let reward = move |original: &str, candidate: &str| -> kis::Result<f64> {
        Ok(score_pair(original, candidate, &score)?.total)
    };
    let mut policy =
        ToyLexicalPolicy::bundled().map_err(|e| CliError::Internal(e.to_string()))?;
    let trace = train(&mut policy, &docs, &reward, &trainer)?;

    let mut csv = format!(
        "# seeds={}\n# algorithm={algorithm_name} k={k} steps={} learning_rate={} ablate={ablate}\n",
        trainer.seed, trainer.steps, trainer.learning_rate
    );
    csv.push_str("step,k,seed,mean_reward\n");
    for step in &trace.steps {
        csv.push_str(&format!(
            "{},{k},{},{}\n",
            step.step, trainer.seed, step.mean_reward
        ));
    }
    write_output(cli.out.as_deref().or(cfg.out.as_deref()), &csv)
}

pub fn compare_scst(
    cli: &Cli,
    cfg: &RunConfig,
    seeds: Option<u64>,
    learning_rate: Option<f64>,
    inputs: Option<&Path>,
    trace_out: Option<&Path>,
) -> Result<(), CliError> {
    let ks = parse_k_values(cli.k.as_deref().or(cfg.k.as_deref()))?.unwrap_or_else(|| vec![2, 8]);
    let seed_count = seeds.or(cfg.seeds).unwrap_or(6);
    if seed_count == 0 {
        return Err(CliError::Usage("compare-scst: need at least one seed".into()));
    }
    let base_seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let seed_list: Vec<u64> = (0..seed_count).map(|i| base_seed + i).collect();
    let steps = cli.steps.or(cfg.steps).unwrap_or(500);
    let learning_rate = learning_rate
        .or(cfg.learning_rate)
        .unwrap_or_else(|| TrainerConfig::default().learning_rate);

    let docs = load_inputs(inputs.or(cfg.inputs.as_deref()))?;
    let score = build_score_config(cli, cfg)?;
    let reward = move |original: &str, candidate: &str| -> kis::Result<f64> {
        Ok(score_pair(original, candidate, &score)?.total)
    };
    let comparison = compare_k(
        &ks,
        &seed_list,
        &docs,
        || ToyLexicalPolicy::bundled().expect("bundled substitution table parses"),
        &reward,
        steps,
        learning_rate,
    )?;

    write_output(
        cli.out.as_deref().or(cfg.out.as_deref()),
        &comparison.summary_csv(),
    )?;
    if let Some(path) = trace_out.map(PathBuf::from).or_else(|| cfg.trace_out.clone()) {
        fs::write(&path, comparison.trace_csv()).map_err(|e| data_at(&path, e))?;
    }
    Ok(())
}
