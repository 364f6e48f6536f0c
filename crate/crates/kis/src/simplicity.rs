//! Syntactic simplicity (grade-level ramp) and lexical simplicity
//! (frequency-shift ramp).

use std::collections::BTreeSet;
use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{KisError, Result};
use crate::mathx::clip01;
use crate::textproc::TokenizedText;

/// Lexicon mapping casefolded words to Zipf frequencies on [0, 8].
/// Lookup of an absent word yields 0 exactly.
#[derive(Debug, Clone, Default)]
pub struct ZipfTable {
    entries: HashMap<String, f64>,
}

impl ZipfTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert a word; the value must lie in [0, 8].
    pub fn insert(&mut self, word: &str, zipf: f64) -> Result<()> {
        if !(0.0..=8.0).contains(&zipf) {
            return Err(KisError::InvalidConfig(format!(
                "zipf value {zipf} for {word:?} outside [0, 8]"
            )));
        }
        self.entries.insert(word.to_lowercase(), zipf);
        Ok(())
    }

    /// Frequency of a casefolded word; 0 when absent.
    pub fn get(&self, word: &str) -> f64 {
        self.entries.get(word).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Load from UTF-8 TSV, "word<TAB>zipf" per line; '#' starts a comment.
    /// Rejects values outside [0, 8].
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut table = Self::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let entry = line.split('#').next().unwrap_or("").trim();
            if entry.is_empty() {
                continue;
            }
            let mut parts = entry.split('\t');
            let (Some(word), Some(value)) = (parts.next(), parts.next()) else {
                return Err(KisError::Parse(format!(
                    "zipf table line {}: expected word<TAB>value, got {entry:?}",
                    idx + 1
                )));
            };
            let zipf: f64 = value.trim().parse().map_err(|_| {
                KisError::Parse(format!(
                    "zipf table line {}: bad number {value:?}",
                    idx + 1
                ))
            })?;
            table.insert(word.trim(), zipf)?;
        }
        Ok(table)
    }

    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    /// The bundled sample lexicon of common English words.
    pub fn bundled() -> &'static ZipfTable {
        static TABLE: OnceLock<ZipfTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            Self::from_reader(crate::bundled::ZIPF_TABLE.as_bytes())
                .expect("bundled zipf table parses")
        })
    }
}

/// Calibration constants for the grade-level and frequency-shift ramps.
#[derive(Debug, Clone)]
pub struct SimplicityConfig {
    /// Peak of the lexical ramp; the frequency shift that scores 1.0.
    pub target_zipf_shift: f64,
    /// Grade-drop target below this grade level is a flat `low_delta`.
    pub low_knee: f64,
    pub low_delta: f64,
    /// Middle piece: slope and intercept for grades in [low_knee, high_knee).
    pub mid_slope: f64,
    pub mid_intercept: f64,
    /// Upper piece for grades at or above high_knee.
    pub high_knee: f64,
    pub high_slope: f64,
    pub high_intercept: f64,
}

impl Default for SimplicityConfig {
    fn default() -> Self {
        Self {
            target_zipf_shift: 0.4,
            low_knee: 4.0,
            low_delta: 0.1,
            mid_slope: 0.5,
            mid_intercept: -1.9,
            high_knee: 12.0,
            high_slope: 0.8,
            high_intercept: -5.6,
        }
    }
}

impl SimplicityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_zipf_shift > 0.0) {
            return Err(KisError::InvalidConfig(format!(
                "target_zipf_shift must be > 0, got {}",
                self.target_zipf_shift
            )));
        }
        Ok(())
    }
}

/// Flesch-Kincaid grade level:
/// 0.39·(words/sentences) + 11.8·(syllables/words) − 15.59.
/// Words are tokens of kind word or number; numbers contribute 1 syllable.
pub fn fkgl(doc: &TokenizedText) -> Result<f64> {
    let words = doc.word_count();
    if words == 0 {
        return Err(KisError::NoWords);
    }
    let syllables: usize = doc
        .tokens
        .iter()
        .filter(|t| t.is_wordlike())
        .map(|t| t.syllables)
        .sum();
    let sentences = doc.sentences.len().max(1);
    Ok(0.39 * (words as f64 / sentences as f64) + 11.8 * (syllables as f64 / words as f64)
        - 15.59)
}

/// Grade-level drop to aim for, as a piecewise-linear function of the
/// starting grade. Continuous at the lower knee, discontinuous at the
/// upper one; kept verbatim.
pub fn target_delta(f_start: f64, cfg: &SimplicityConfig) -> f64 {
    if f_start < cfg.low_knee {
        cfg.low_delta
    } else if f_start < cfg.high_knee {
        cfg.mid_slope * f_start + cfg.mid_intercept
    } else {
        cfg.high_slope * f_start + cfg.high_intercept
    }
}

/// Syntactic simplicity: a symmetric ramp over the achieved grade-level
/// drop, peaking at 1 when the drop hits `target_delta` and falling
/// linearly on both sides.
pub fn s_score(
    original: &TokenizedText,
    simplified: &TokenizedText,
    cfg: &SimplicityConfig,
) -> Result<f64> {
    let f_start = fkgl(original)?;
    let f_end = fkgl(simplified)?;
    let drop = f_start - f_end;
    let tgt = target_delta(f_start, cfg);
    Ok(clip01(1.0 - (drop - tgt).abs() / tgt))
}

/// Mean Zipf frequency over a word set; 0 for the empty set.
fn mean_zipf(words: &BTreeSet<String>, table: &ZipfTable) -> f64 {
    if words.is_empty() {
        return 0.0;
    }
    let total: f64 = words.iter().map(|w| table.get(w)).sum();
    total / words.len() as f64
}

/// Frequency shift between two content-word sets:
/// Z(w2 − w1) − Z(w1 − w2), where Z is the mean table value and Z(∅) = 0.
/// Positive when inserted words are more frequent than deleted ones.
pub fn delta_z(w1: &BTreeSet<String>, w2: &BTreeSet<String>, table: &ZipfTable) -> f64 {
    let inserted: BTreeSet<String> = w2.difference(w1).cloned().collect();
    let deleted: BTreeSet<String> = w1.difference(w2).cloned().collect();
    mean_zipf(&inserted, table) - mean_zipf(&deleted, table)
}

/// Lexical simplicity: symmetric ramp over the frequency shift, peaking at
/// `cfg.target_zipf_shift`.
pub fn l_score(
    w1: &BTreeSet<String>,
    w2: &BTreeSet<String>,
    table: &ZipfTable,
    cfg: &SimplicityConfig,
) -> f64 {
    let shift = delta_z(w1, w2, table);
    clip01(1.0 - (shift - cfg.target_zipf_shift).abs() / cfg.target_zipf_shift)
}
