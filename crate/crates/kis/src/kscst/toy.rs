//! Desk-scale trainable policy: per-word softmax over lexical substitution
//! candidates. Every word token with a table entry is one decision step;
//! everything else is copied through.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;
use std::path::Path;

use rand::RngCore;

use crate::error::{KisError, Result};
use crate::mathx::{exp, ln};
use crate::textproc::{TokenKind, TokenizedText};

use super::{Generation, Gradient, Policy};

/// Softmax-parameterized lexical substitution policy. Parameters are one
/// logit per (word slot, candidate); candidate 0 is always the word itself.
#[derive(Debug, Clone)]
pub struct ToyLexicalPolicy {
    /// Sorted table words; position is the word slot.
    words: Vec<String>,
    /// candidates[slot][0] is the word itself, then its alternatives.
    candidates: Vec<Vec<String>>,
    /// offsets[slot]..offsets[slot+1] indexes the flat logit vector.
    offsets: Vec<usize>,
    logits: Vec<f64>,
    slot_of: HashMap<String, usize>,
}

impl ToyLexicalPolicy {
    /// Build from complex word → alternatives. The word itself is placed
    /// first in its own candidate list; duplicates are dropped.
    pub fn new(table: BTreeMap<String, Vec<String>>) -> Result<Self> {
        if table.is_empty() {
            return Err(KisError::InvalidConfig("empty substitution table".into()));
        }
        let mut words = Vec::with_capacity(table.len());
        let mut candidates = Vec::with_capacity(table.len());
        let mut offsets = vec![0usize];
        for (word, alternatives) in table {
            let word = word.to_lowercase();
            let mut list = vec![word.clone()];
            for alt in alternatives {
                let alt = alt.to_lowercase();
                if !alt.is_empty() && !list.contains(&alt) {
                    list.push(alt);
                }
            }
            if list.len() < 2 {
                return Err(KisError::InvalidConfig(format!(
                    "word {word:?} has no alternatives"
                )));
            }
            offsets.push(offsets.last().unwrap() + list.len());
            words.push(word);
            candidates.push(list);
        }
        let logits = vec![0.0; *offsets.last().unwrap()];
        let slot_of = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(Self {
            words,
            candidates,
            offsets,
            logits,
            slot_of,
        })
    }

    /// Parse "complex<TAB>alt1,alt2,..." lines; '#' starts a comment.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut table: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let entry = line.split('#').next().unwrap_or("").trim();
            if entry.is_empty() {
                continue;
            }
            let mut parts = entry.split('\t');
            let (Some(word), Some(alts)) = (parts.next(), parts.next()) else {
                return Err(KisError::Parse(format!(
                    "substitution table line {}: expected word<TAB>alternatives",
                    idx + 1
                )));
            };
            let alternatives: Vec<String> = alts
                .split(',')
                .map(|a| a.trim().to_string())
                .filter(|a| !a.is_empty())
                .collect();
            table.insert(word.trim().to_string(), alternatives);
        }
        Self::new(table)
    }

    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    /// The bundled toy substitution table, parameters at zero.
    pub fn bundled() -> Result<Self> {
        Self::from_reader(crate::bundled::SUBSTITUTIONS.as_bytes())
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn candidates_for(&self, word: &str) -> Option<&[String]> {
        self.slot_of
            .get(word)
            .map(|&slot| self.candidates[slot].as_slice())
    }

    fn slot_range(&self, slot: usize) -> std::ops::Range<usize> {
        self.offsets[slot]..self.offsets[slot + 1]
    }

    /// Softmax over one slot's logits; sums to 1 by construction.
    pub fn distribution(&self, slot: usize) -> Vec<f64> {
        let logits = &self.logits[self.slot_range(slot)];
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|&l| exp(l - max)).collect();
        let total: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / total).collect()
    }

    /// Probability the policy currently assigns to `candidate` at `word`.
    pub fn prob_of(&self, word: &str, candidate: &str) -> Option<f64> {
        let &slot = self.slot_of.get(word)?;
        let position = self.candidates[slot].iter().position(|c| c == candidate)?;
        Some(self.distribution(slot)[position])
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn set_logit(&mut self, index: usize, value: f64) {
        self.logits[index] = value;
    }

    /// Flat parameter index of (word slot, candidate position).
    pub fn param_index(&self, slot: usize, position: usize) -> usize {
        self.offsets[slot] + position
    }

    /// Match substituted surface to the original token's capitalization.
    fn styled(original_surface: &str, replacement: &str) -> String {
        let capitalized = original_surface
            .chars()
            .next()
            .is_some_and(|c| c.is_uppercase());
        if !capitalized {
            return replacement.to_string();
        }
        let mut chars = replacement.chars();
        match chars.next() {
            Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
            None => String::new(),
        }
    }

    fn generate(
        &self,
        input: &TokenizedText,
        mut choose: impl FnMut(&Self, usize) -> usize,
    ) -> Generation {
        let mut tokens = Vec::with_capacity(input.tokens.len());
        let mut step_logps = Vec::new();
        let mut step_grads = Vec::new();
        for token in &input.tokens {
            let slot = if token.kind == TokenKind::Word {
                self.slot_of.get(&token.lower).copied()
            } else {
                None
            };
            let Some(slot) = slot else {
                tokens.push(token.surface.clone());
                continue;
            };
            let probs = self.distribution(slot);
            let choice = choose(self, slot);
            tokens.push(Self::styled(&token.surface, &self.candidates[slot][choice]));
            step_logps.push(ln(probs[choice]));
            // ∇_k ln p(choice) over this slot's logits: δ(k=choice) − p_k.
            let grad: Vec<(usize, f64)> = probs
                .iter()
                .enumerate()
                .map(|(k, &p)| {
                    let indicator = if k == choice { 1.0 } else { 0.0 };
                    (self.param_index(slot, k), indicator - p)
                })
                .collect();
            step_grads.push(grad);
        }
        Generation {
            tokens,
            step_logps,
            step_grads,
        }
    }
}

impl Policy for ToyLexicalPolicy {
    fn sample(&self, input: &TokenizedText, rng: &mut dyn RngCore) -> Generation {
        self.generate(input, |policy, slot| {
            let probs = policy.distribution(slot);
            let draw: f64 = rand::Rng::random(rng);
            let mut cumulative = 0.0;
            for (i, &p) in probs.iter().enumerate() {
                cumulative += p;
                if draw < cumulative {
                    return i;
                }
            }
            probs.len() - 1
        })
    }

    fn greedy(&self, input: &TokenizedText) -> Generation {
        self.generate(input, |policy, slot| {
            let probs = policy.distribution(slot);
            let mut best = 0;
            for (i, &p) in probs.iter().enumerate().skip(1) {
                if p > probs[best] {
                    best = i;
                }
            }
            best
        })
    }

    fn update(&mut self, gradient: &Gradient, learning_rate: f64) {
        for (&index, &g) in gradient {
            self.logits[index] -= learning_rate * g;
        }
    }

    fn param_count(&self) -> usize {
        self.logits.len()
    }
}
