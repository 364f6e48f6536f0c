//! Fluency scoring: language-model likelihood ratio ramp and adversarial
//! discriminator probability.

mod disc;
mod ngram;

pub use disc::{
    retrain_discriminator, Discriminator, Label, RetrainReport, TrainingBuffer, DEFAULT_CAPACITY,
    DEFAULT_FEATURE_DIM,
};
pub use ngram::{train_ngram_lm, train_ngram_lm_from_reader, NGramLM};

use crate::error::{KisError, Result};
use crate::mathx::clip01;
use crate::textproc::TokenizedText;

/// Anything that can assign a per-token mean natural-log likelihood.
pub trait LanguageModel: Send + Sync {
    fn avg_log_likelihood(&self, doc: &TokenizedText) -> f64;
}

/// Fluency ramp: 1 when the simplified text is at least as likely as the
/// original, falling linearly to 0 as the likelihood gap reaches `lambda`.
pub fn lm_score(p: &TokenizedText, q: &TokenizedText, lm: &dyn LanguageModel, lambda: f64) -> f64 {
    let gap = lm.avg_log_likelihood(p) - lm.avg_log_likelihood(q);
    clip01(1.0 - gap / lambda)
}

const LAMBDA_LO: f64 = 1e-4;
const LAMBDA_HI: f64 = 1e6;
const LAMBDA_TOL: f64 = 1e-4;

/// Smallest lambda whose mean `lm_score` over `pairs` reaches
/// `target_mean`, found by bisection (the mean is non-decreasing in
/// lambda). Returns the lower search bound when it already suffices.
pub fn calibrate_lambda(
    pairs: &[(TokenizedText, TokenizedText)],
    lm: &dyn LanguageModel,
    target_mean: f64,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(KisError::InvalidConfig("no calibration pairs".into()));
    }
    if !(0.0 < target_mean && target_mean < 1.0) {
        return Err(KisError::InvalidConfig(format!(
            "target mean must lie in (0, 1), got {target_mean}"
        )));
    }
    // Gaps are fixed; only the ramp slope changes with lambda.
    let gaps: Vec<f64> = pairs
        .iter()
        .map(|(p, q)| lm.avg_log_likelihood(p) - lm.avg_log_likelihood(q))
        .collect();
    let mean_at = |lambda: f64| {
        gaps.iter().map(|&g| clip01(1.0 - g / lambda)).sum::<f64>() / gaps.len() as f64
    };

    if mean_at(LAMBDA_LO) >= target_mean {
        return Ok(LAMBDA_LO);
    }
    let achieved = mean_at(LAMBDA_HI);
    if achieved < target_mean {
        return Err(KisError::Unreachable {
            target: target_mean,
            lambda_max: LAMBDA_HI,
            achieved,
        });
    }
    let (mut lo, mut hi) = (LAMBDA_LO, LAMBDA_HI);
    while hi - lo > LAMBDA_TOL {
        let mid = 0.5 * (lo + hi);
        if mean_at(mid) >= target_mean {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
