//! Hashed-feature logistic discriminator and its buffer/retrain protocol:
//! fill a 2000-item buffer, split 90/10, train 5 epochs from reset weights,
//! keep the checkpoint with the best validation F1, drain the buffer.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::binio;
use crate::error::{KisError, Result};
use crate::mathx::sigmoid;
use crate::textproc::{tokenize, StopwordList, TokenizedText};

const MAGIC: &[u8] = b"KISD1";

/// Default hashed feature space; fixed so serialized models stay portable.
pub const DEFAULT_FEATURE_DIM: usize = 1 << 18;
pub const DEFAULT_CAPACITY: usize = 2000;
const EPOCHS: usize = 5;
const LEARNING_RATE: f64 = 0.1;
const TRAIN_FRACTION_NUM: usize = 9;
const TRAIN_FRACTION_DEN: usize = 10;

/// Buffer label: 0 for generated text, 1 for authentic text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Generated,
    Authentic,
}

impl Label {
    fn target(self) -> f64 {
        match self {
            Label::Generated => 0.0,
            Label::Authentic => 1.0,
        }
    }
}

/// Fixed-capacity store of labeled texts awaiting a retrain cycle.
#[derive(Debug, Clone)]
pub struct TrainingBuffer {
    items: Vec<(String, Label)>,
    capacity: usize,
}

impl Default for TrainingBuffer {
    fn default() -> Self {
        Self::with_capacity(DEFAULT_CAPACITY)
    }
}

impl TrainingBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(capacity: usize) -> Self {
        assert!(capacity >= 2, "buffer needs room for both labels");
        Self {
            items: Vec::with_capacity(capacity),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn is_full(&self) -> bool {
        self.items.len() == self.capacity
    }

    pub fn clear(&mut self) {
        self.items.clear();
    }

    /// Append one item. Returns true exactly when the push fills the buffer,
    /// signalling that a retrain is due. Pushing to an already-full buffer
    /// is a protocol violation.
    pub fn push(&mut self, text: &str, label: Label) -> Result<bool> {
        if self.is_full() {
            return Err(KisError::BufferFull);
        }
        self.items.push((text.to_string(), label));
        Ok(self.is_full())
    }
}

/// FNV-1a 64-bit; fixed so feature indices are identical everywhere.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 14695981039346656037;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(1099511628211);
    }
    hash
}

/// Logistic classifier over hashed token-unigram, token-bigram, and
/// character-trigram counts, L2-normalized per document.
#[derive(Debug, Clone)]
pub struct Discriminator {
    feature_dim: usize,
    weights: Vec<f64>,
    bias: f64,
}

impl Default for Discriminator {
    fn default() -> Self {
        Self::new(DEFAULT_FEATURE_DIM)
    }
}

impl Discriminator {
    /// Zero-initialized model: scores 0.5 for every input.
    pub fn new(feature_dim: usize) -> Self {
        assert!(feature_dim > 0);
        Self {
            feature_dim,
            weights: vec![0.0; feature_dim],
            bias: 0.0,
        }
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    fn bucket(&self, feature: &str) -> usize {
        (fnv1a(feature.as_bytes()) % self.feature_dim as u64) as usize
    }

    /// Sparse L2-normalized feature vector. BTreeMap keys keep dot products
    /// and updates in a fixed order.
    pub fn features(&self, doc: &TokenizedText) -> BTreeMap<usize, f64> {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        let mut bump = |feature: String| {
            *counts.entry(self.bucket(&feature)).or_insert(0.0) += 1.0;
        };
        let lowers: Vec<&str> = doc.tokens.iter().map(|t| t.lower.as_str()).collect();
        for w in &lowers {
            bump(format!("u:{w}"));
        }
        for pair in lowers.windows(2) {
            bump(format!("b:{} {}", pair[0], pair[1]));
        }
        let joined = lowers.join(" ");
        let chars: Vec<char> = joined.chars().collect();
        for tri in chars.windows(3) {
            bump(format!("c:{}{}{}", tri[0], tri[1], tri[2]));
        }
        let norm = counts.values().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in counts.values_mut() {
                *v /= norm;
            }
        }
        counts
    }

    fn margin(&self, features: &BTreeMap<usize, f64>) -> f64 {
        let dot: f64 = features.iter().map(|(&i, &v)| self.weights[i] * v).sum();
        dot + self.bias
    }

    /// Probability the document is authentic; strictly inside (0, 1).
    pub fn d_score(&self, doc: &TokenizedText) -> f64 {
        sigmoid(self.margin(&self.features(doc)))
    }

    /// Serialize as "KISD1": dimension, bias, then nonzero weights sorted
    /// by index.
    pub fn save<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        binio::write_u64(w, self.feature_dim as u64)?;
        binio::write_f64(w, self.bias)?;
        let nonzero: Vec<(usize, f64)> = self
            .weights
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i, v))
            .collect();
        binio::write_u64(w, nonzero.len() as u64)?;
        for (index, value) in nonzero {
            binio::write_u64(w, index as u64)?;
            binio::write_f64(w, value)?;
        }
        Ok(())
    }

    pub fn save_to_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.save(&mut file)
    }

    pub fn load<R: Read>(r: &mut R) -> Result<Self> {
        binio::expect_magic(r, MAGIC)?;
        let feature_dim = binio::read_u64(r)? as usize;
        if feature_dim == 0 || feature_dim > 1 << 30 {
            return Err(KisError::Parse(format!(
                "implausible feature dimension {feature_dim}"
            )));
        }
        let bias = binio::read_f64(r)?;
        let nonzero = binio::read_u64(r)? as usize;
        let mut weights = vec![0.0; feature_dim];
        for _ in 0..nonzero {
            let index = binio::read_u64(r)? as usize;
            if index >= feature_dim {
                return Err(KisError::Parse(format!(
                    "weight index {index} out of range {feature_dim}"
                )));
            }
            weights[index] = binio::read_f64(r)?;
        }
        Ok(Self {
            feature_dim,
            weights,
            bias,
        })
    }

    pub fn load_from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::load(&mut file)
    }
}

/// Outcome of one retrain cycle: the selected checkpoint plus the
/// per-epoch validation F1 trail it was selected from.
#[derive(Debug, Clone)]
pub struct RetrainReport {
    pub discriminator: Discriminator,
    /// Validation F1 after each of the 5 epochs.
    pub epoch_f1: Vec<f64>,
    /// Index into epoch_f1 of the selected checkpoint (first maximum).
    pub best_epoch: usize,
}

impl RetrainReport {
    pub fn best_f1(&self) -> f64 {
        self.epoch_f1[self.best_epoch]
    }
}

/// F1 for label 1 as positive class; zero predicted or zero true positives
/// give 0 rather than a division error.
fn f1_score(examples: &[(BTreeMap<usize, f64>, f64)], disc: &Discriminator) -> f64 {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (features, target) in examples {
        let predicted_positive = sigmoid(disc.margin(features)) > 0.5;
        let actual_positive = *target == 1.0;
        match (predicted_positive, actual_positive) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    if tp == 0 {
        return 0.0;
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fn_) as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Run one retrain cycle over a full buffer: reset weights, shuffle, split
/// 90/10 train/validation, run 5 epochs of logistic SGD (lr 0.1)
/// checkpointing each, return the checkpoint with the highest validation F1
/// and drain the buffer. Deterministic under `seed`.
pub fn retrain_discriminator(
    buffer: &mut TrainingBuffer,
    seed: u64,
    stopwords: &StopwordList,
) -> Result<RetrainReport> {
    if !buffer.is_full() {
        return Err(KisError::BufferNotFull {
            len: buffer.len(),
            capacity: buffer.capacity(),
        });
    }
    let has_generated = buffer.items.iter().any(|(_, l)| *l == Label::Generated);
    let has_authentic = buffer.items.iter().any(|(_, l)| *l == Label::Authentic);
    if !has_generated || !has_authentic {
        return Err(KisError::DegenerateBuffer);
    }

    let mut disc = Discriminator::default();
    // Texts that fail to tokenize (whitespace-only) contribute an empty
    // feature vector instead of aborting the cycle.
    let mut examples: Vec<(BTreeMap<usize, f64>, f64)> = buffer
        .items
        .iter()
        .map(|(text, label)| {
            let features = match tokenize(text, stopwords) {
                Ok(doc) => disc.features(&doc),
                Err(_) => BTreeMap::new(),
            };
            (features, label.target())
        })
        .collect();
    buffer.clear();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    examples.shuffle(&mut rng);
    let train_len = (examples.len() * TRAIN_FRACTION_NUM / TRAIN_FRACTION_DEN).max(1);
    let (train, val) = examples.split_at(train_len.min(examples.len() - 1));

    let mut epoch_f1 = Vec::with_capacity(EPOCHS);
    let mut checkpoints: Vec<Discriminator> = Vec::with_capacity(EPOCHS);
    let mut order: Vec<usize> = (0..train.len()).collect();
    for _ in 0..EPOCHS {
        order.shuffle(&mut rng);
        for &idx in &order {
            let (features, target) = &train[idx];
            let error = sigmoid(disc.margin(features)) - target;
            for (&i, &v) in features {
                disc.weights[i] -= LEARNING_RATE * error * v;
            }
            disc.bias -= LEARNING_RATE * error;
        }
        epoch_f1.push(f1_score(val, &disc));
        checkpoints.push(disc.clone());
    }

    let best_epoch = epoch_f1
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("f1 is finite"))
        .map(|(i, _)| i)
        .expect("five epochs ran");
    Ok(RetrainReport {
        discriminator: checkpoints.swap_remove(best_epoch),
        epoch_f1,
        best_epoch,
    })
}
