//! Binary guards: a compression-ratio band and novel-entity detection.
//! Either one triggering zeroes the total reward.

use serde::Serialize;

use crate::error::{KisError, Result};
use crate::textproc::{EntitySet, TokenizedText};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Trigger,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// Allowed compression band; bounds are inclusive.
#[derive(Debug, Clone, Copy)]
pub struct BrevityBounds {
    pub c_min: f64,
    pub c_max: f64,
}

impl Default for BrevityBounds {
    fn default() -> Self {
        Self { c_min: 0.6, c_max: 1.5 }
    }
}

impl BrevityBounds {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.c_min && self.c_min <= self.c_max) {
            return Err(KisError::InvalidConfig(format!(
                "brevity bounds need 0 < c_min ≤ c_max, got [{}, {}]",
                self.c_min, self.c_max
            )));
        }
        Ok(())
    }
}

/// Joint outcome of both guards for one pair.
#[derive(Debug, Clone, Serialize)]
pub struct GuardrailVerdict {
    pub brevity: Verdict,
    pub inaccuracy: Verdict,
    /// Word-count ratio simplified/original.
    pub compression: f64,
    /// Entities of the simplified text absent from the original.
    pub novel_entities: Vec<String>,
}

impl GuardrailVerdict {
    pub fn all_pass(&self) -> bool {
        self.brevity.passed() && self.inaccuracy.passed()
    }
}

/// Compression check: C = words(simplified) / words(original), passing iff
/// c_min ≤ C ≤ c_max. Word counts include numbers, never punctuation.
pub fn brevity(
    original: &TokenizedText,
    simplified: &TokenizedText,
    bounds: &BrevityBounds,
) -> Result<(Verdict, f64)> {
    let base = original.word_count();
    if base == 0 {
        return Err(KisError::NoWords);
    }
    let compression = simplified.word_count() as f64 / base as f64;
    let verdict = if bounds.c_min <= compression && compression <= bounds.c_max {
        Verdict::Pass
    } else {
        Verdict::Trigger
    };
    Ok((verdict, compression))
}

/// Novel-entity check: triggers iff the simplified text mentions an entity
/// the original never did.
pub fn inaccuracy(e1: &EntitySet, e2: &EntitySet) -> (Verdict, EntitySet) {
    let novel = e2.difference(e1);
    let verdict = if novel.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Trigger
    };
    (verdict, novel)
}
