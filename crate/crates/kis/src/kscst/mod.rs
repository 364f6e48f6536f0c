//! Policy-gradient training: the self-critical loss with a greedy baseline,
//! its k-sample mean-baseline variant, the training loop, and the
//! k-comparison harness.

mod toy;

pub use toy::ToyLexicalPolicy;

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{KisError, Result};
use crate::textproc::TokenizedText;

/// Sparse parameter gradient: flat parameter index → partial derivative.
pub type Gradient = BTreeMap<usize, f64>;

/// One generated sequence with per-decision log-probabilities and their
/// parameter gradients.
#[derive(Debug, Clone)]
pub struct Generation {
    pub tokens: Vec<String>,
    /// One entry per decision; each is ln of the probability the sampler
    /// (or argmax) used.
    pub step_logps: Vec<f64>,
    /// step_grads[i]: sparse ∇_θ of step_logps[i].
    pub step_grads: Vec<Vec<(usize, f64)>>,
}

impl Generation {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn logp_sum(&self) -> f64 {
        self.step_logps.iter().sum()
    }
}

/// A scored candidate as the losses consume it.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub tokens: Vec<String>,
    pub step_logps: Vec<f64>,
    pub reward: f64,
}

impl Candidate {
    pub fn from_generation(generation: &Generation, reward: f64) -> Self {
        Self {
            tokens: generation.tokens.clone(),
            step_logps: generation.step_logps.clone(),
            reward,
        }
    }

    pub fn logp_sum(&self) -> f64 {
        self.step_logps.iter().sum()
    }
}

/// Mean with an exact short-circuit: when every entry is bitwise equal the
/// mean IS that value, so baseline-minus-reward coefficients vanish
/// exactly and an equal-reward batch produces a gradient of exactly zero.
fn batch_mean(rewards: &[f64]) -> f64 {
    let first = rewards[0];
    if rewards.iter().all(|r| r.to_bits() == first.to_bits()) {
        return first;
    }
    rewards.iter().sum::<f64>() / rewards.len() as f64
}

/// k sampled candidates for one input plus their mean reward.
#[derive(Debug, Clone)]
pub struct CandidateBatch {
    pub input: TokenizedText,
    pub candidates: Vec<Candidate>,
    pub mean_reward: f64,
}

impl CandidateBatch {
    pub fn new(input: TokenizedText, candidates: Vec<Candidate>) -> Result<Self> {
        if candidates.len() < 2 {
            return Err(KisError::InvalidConfig(format!(
                "a candidate batch needs k ≥ 2, got {}",
                candidates.len()
            )));
        }
        let rewards: Vec<f64> = candidates.iter().map(|c| c.reward).collect();
        Ok(Self {
            input,
            candidates,
            mean_reward: batch_mean(&rewards),
        })
    }

    pub fn k(&self) -> usize {
        self.candidates.len()
    }
}

/// Self-critical loss: (R̂ − R^S) · Σ log p over the sampled sequence,
/// with R̂ the greedy decode's reward.
pub fn scst_loss(sampled: &Candidate, greedy: &Candidate) -> f64 {
    (greedy.reward - sampled.reward) * sampled.logp_sum()
}

/// k-sample variant: Σ_j (R̄ − R_j) · Σ log p of candidate j, with the
/// batch mean R̄ as the shared baseline.
pub fn kscst_loss(batch: &CandidateBatch) -> f64 {
    batch
        .candidates
        .iter()
        .map(|c| (batch.mean_reward - c.reward) * c.logp_sum())
        .sum()
}

/// A generator the trainer can drive: sampling and greedy decoding yield
/// per-step log-prob gradients; update applies one descent step.
pub trait Policy {
    fn sample(&self, input: &TokenizedText, rng: &mut dyn RngCore) -> Generation;
    fn greedy(&self, input: &TokenizedText) -> Generation;
    /// θ ← θ − learning_rate · gradient.
    fn update(&mut self, gradient: &Gradient, learning_rate: f64);
    fn param_count(&self) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// One sample against the greedy baseline.
    Scst,
    /// k samples against their mean.
    Kscst,
}

#[derive(Debug, Clone)]
pub struct TrainerConfig {
    pub k: usize,
    pub learning_rate: f64,
    pub steps: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    /// Exclude each candidate's own reward from its baseline. Unbiased but
    /// higher-variance; the verbatim self-inclusive mean is the default.
    pub leave_one_out: bool,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            k: 8,
            // Where population-size effects stay visible on the bundled
            // task: at much larger rates every k saturates within the
            // default step budget and the k curves collapse together.
            learning_rate: 0.1,
            steps: 500,
            seed: 0,
            algorithm: Algorithm::Kscst,
            leave_one_out: false,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.algorithm == Algorithm::Kscst && self.k < 2 {
            return Err(KisError::InvalidConfig(format!(
                "k-SCST needs k ≥ 2, got {}",
                self.k
            )));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(KisError::InvalidConfig(format!(
                "learning rate must be finite and > 0, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TraceStep {
    pub step: usize,
    /// Mean reward of the step's candidate population (for scst: the
    /// sampled and greedy rewards averaged).
    pub mean_reward: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TrainingTrace {
    pub steps: Vec<TraceStep>,
}

impl TrainingTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn initial_mean(&self) -> Option<f64> {
        self.steps.first().map(|s| s.mean_reward)
    }

    pub fn final_mean(&self) -> Option<f64> {
        self.steps.last().map(|s| s.mean_reward)
    }
}

/// Reward callback: (original raw text, candidate text) → total reward.
pub type RewardFn<'a> = &'a dyn Fn(&str, &str) -> Result<f64>;

fn accumulate(grad: &mut Gradient, steps: &[Vec<(usize, f64)>], coeff: f64) {
    if coeff == 0.0 {
        return;
    }
    for step in steps {
        for &(index, value) in step {
            *grad.entry(index).or_insert(0.0) += coeff * value;
        }
    }
}

fn check_finite(grad: &Gradient, step: usize) -> Result<()> {
    if grad.values().any(|v| !v.is_finite()) {
        return Err(KisError::NonFiniteGradient { step });
    }
    Ok(())
}

/// Run the training loop: per step, draw the next input round-robin,
/// generate candidates, score them, accumulate the loss gradient, and
/// apply exactly one update. Deterministic under `cfg.seed`.
pub fn train<P: Policy + ?Sized>(
    policy: &mut P,
    inputs: &[TokenizedText],
    reward_fn: RewardFn,
    cfg: &TrainerConfig,
) -> Result<TrainingTrace> {
    cfg.validate()?;
    if inputs.is_empty() {
        return Err(KisError::EmptyCorpus);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut trace = TrainingTrace::default();

    for step in 0..cfg.steps {
        let input = &inputs[step % inputs.len()];
        let mut grad = Gradient::new();
        let mean_reward;

        match cfg.algorithm {
            Algorithm::Kscst => {
                let mut generations = Vec::with_capacity(cfg.k);
                let mut rewards = Vec::with_capacity(cfg.k);
                for _ in 0..cfg.k {
                    let generation = policy.sample(input, &mut rng);
                    let reward = reward_fn(&input.raw, &generation.text())?;
                    generations.push(generation);
                    rewards.push(reward);
                }
                let mean = batch_mean(&rewards);
                let all_equal = rewards
                    .iter()
                    .all(|r| r.to_bits() == rewards[0].to_bits());
                if !all_equal {
                    let total: f64 = rewards.iter().sum();
                    for (generation, &reward) in generations.iter().zip(&rewards) {
                        let baseline = if cfg.leave_one_out {
                            (total - reward) / (cfg.k - 1) as f64
                        } else {
                            mean
                        };
                        accumulate(&mut grad, &generation.step_grads, baseline - reward);
                    }
                }
                mean_reward = mean;
            }
            Algorithm::Scst => {
                let sampled = policy.sample(input, &mut rng);
                let sampled_reward = reward_fn(&input.raw, &sampled.text())?;
                let greedy = policy.greedy(input);
                let greedy_reward = reward_fn(&input.raw, &greedy.text())?;
                accumulate(
                    &mut grad,
                    &sampled.step_grads,
                    greedy_reward - sampled_reward,
                );
                mean_reward = batch_mean(&[sampled_reward, greedy_reward]);
            }
        }

        check_finite(&grad, step)?;
        if !grad.is_empty() {
            policy.update(&grad, cfg.learning_rate);
        }
        trace.steps.push(TraceStep { step, mean_reward });
    }
    Ok(trace)
}

/// One seeded training run inside a comparison.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub k: usize,
    pub seed: u64,
    pub trace: TrainingTrace,
}

/// Across-seeds aggregate at one (k, step) cell.
#[derive(Debug, Clone, Copy)]
pub struct SummaryRow {
    pub k: usize,
    pub step: usize,
    pub mean_reward: f64,
    /// Standard error of the mean over seeds; absent for a single seed.
    pub sem: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub seeds: Vec<u64>,
    pub steps: usize,
    pub runs: Vec<RunTrace>,
    pub summary: Vec<SummaryRow>,
}

impl Comparison {
    /// Raw per-run trajectories: step,k,seed,mean_reward.
    pub fn trace_csv(&self) -> String {
        let mut out = format!("# seeds={}\n", format_seeds(&self.seeds));
        out.push_str("step,k,seed,mean_reward\n");
        for run in &self.runs {
            for step in &run.trace.steps {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    step.step, run.k, run.seed, step.mean_reward
                ));
            }
        }
        out
    }

    /// Across-seed aggregates: step,k,mean_reward,sem (sem blank for n=1).
    pub fn summary_csv(&self) -> String {
        let mut out = format!("# seeds={}\n", format_seeds(&self.seeds));
        out.push_str("step,k,mean_reward,sem\n");
        for row in &self.summary {
            let sem = row.sem.map(|s| s.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.step, row.k, row.mean_reward, sem
            ));
        }
        out
    }

    /// Final-step aggregate for one k.
    pub fn final_row(&self, k: usize) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .filter(|row| row.k == k)
            .max_by_key(|row| row.step)
    }
}

fn format_seeds(seeds: &[u64]) -> String {
    seeds
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Sample standard error: std (n−1 denominator) / √n; None for n < 2.
fn sem(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    Some((var / n as f64).sqrt())
}

/// Run one fresh-policy k-SCST training per (k, seed) and aggregate the
/// reward trajectories across seeds.
pub fn compare_k<P, F>(
    ks: &[usize],
    seeds: &[u64],
    inputs: &[TokenizedText],
    policy_factory: F,
    reward_fn: RewardFn,
    steps: usize,
    learning_rate: f64,
) -> Result<Comparison>
where
    P: Policy,
    F: Fn() -> P,
{
    if ks.is_empty() {
        return Err(KisError::InvalidConfig("no k values given".into()));
    }
    if seeds.is_empty() {
        return Err(KisError::InvalidConfig("no seeds given".into()));
    }
    let mut runs = Vec::with_capacity(ks.len() * seeds.len());
    for &k in ks {
        for &seed in seeds {
            let mut policy = policy_factory();
            let cfg = TrainerConfig {
                k,
                learning_rate,
                steps,
                seed,
                algorithm: Algorithm::Kscst,
                leave_one_out: false,
            };
            let trace = train(&mut policy, inputs, reward_fn, &cfg)?;
            runs.push(RunTrace { k, seed, trace });
        }
    }

    let mut summary = Vec::with_capacity(ks.len() * steps);
    for &k in ks {
        let traces: Vec<&RunTrace> = runs.iter().filter(|r| r.k == k).collect();
        for step in 0..steps {
            let values: Vec<f64> = traces
                .iter()
                .map(|r| r.trace.steps[step].mean_reward)
                .collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            summary.push(SummaryRow {
                k,
                step,
                mean_reward: mean,
                sem: sem(&values),
            });
        }
    }
    Ok(Comparison {
        seeds: seeds.to_vec(),
        steps,
        runs,
        summary,
    })
}
