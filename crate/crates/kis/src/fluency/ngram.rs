//! Interpolated add-k n-gram language model over token lowers.
//!
//! Sentences are padded with BOS context only; no end-of-sentence symbol is
//! scored, so the per-token mean runs over exactly the doc's tokens.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Read, Write};
use std::path::Path;

use crate::binio;
use crate::error::{KisError, Result};
use crate::mathx::ln;
use crate::textproc::{tokenize, StopwordList, TokenizedText};

use super::LanguageModel;

const MAGIC: &[u8] = b"KISLM1";
const BOS: u32 = 0;
const UNK: u32 = 1;
/// First id assigned to a vocabulary word.
const WORD_BASE: u32 = 2;

/// Deterministic interpolated add-k n-gram model.
///
/// P_n(w | ctx) = (c(ctx, w) + k·(V+1)·P_{n−1}(w | shorter ctx)) / (c(ctx) + k·(V+1))
/// with unigram base P_1(w) = (c(w) + k) / (T + k·(V+1)), where V is the
/// vocabulary size (the +1 covers the unknown token) and T the token total.
/// Every conditional sums to 1 over vocabulary + unknown.
#[derive(Debug, Clone)]
pub struct NGramLM {
    order: usize,
    add_k: f64,
    /// Sorted vocabulary; index + WORD_BASE is the token id.
    vocab: Vec<String>,
    ids: HashMap<String, u32>,
    /// counts[n-1]: full n-gram → count.
    counts: Vec<HashMap<Vec<u32>, u64>>,
    /// totals[n-1]: context (n-1 tokens) → count. totals[0] holds T at key [].
    totals: Vec<HashMap<Vec<u32>, u64>>,
}

impl NGramLM {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn add_k(&self) -> f64 {
        self.add_k
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    fn id_of(&self, lower: &str) -> u32 {
        self.ids.get(lower).copied().unwrap_or(UNK)
    }

    fn token_total(&self) -> u64 {
        self.totals[0].get([].as_slice()).copied().unwrap_or(0)
    }

    /// Smoothing mass k·(V+1); the +1 covers the unknown token.
    fn smoothing_mass(&self) -> f64 {
        self.add_k * (self.vocab.len() as f64 + 1.0)
    }

    /// P(w | ctx) for the model's full order; `ctx` may be shorter than
    /// order−1 only via recursion.
    fn prob(&self, ctx: &[u32], word: u32) -> f64 {
        let n = ctx.len() + 1;
        if n == 1 {
            let t = self.token_total() as f64;
            let c = if word == UNK {
                0.0
            } else {
                self.counts[0].get(&vec![word][..]).copied().unwrap_or(0) as f64
            };
            return (c + self.add_k) / (t + self.smoothing_mass());
        }
        let backoff = self.prob(&ctx[1..], word);
        let ctx_total = self.totals[n - 1].get(ctx).copied().unwrap_or(0) as f64;
        let denom = ctx_total + self.smoothing_mass();
        if denom == 0.0 {
            return backoff;
        }
        let mut gram = Vec::with_capacity(n);
        gram.extend_from_slice(ctx);
        gram.push(word);
        let c = self.counts[n - 1].get(&gram).copied().unwrap_or(0) as f64;
        (c + self.smoothing_mass() * backoff) / denom
    }

    /// Per-sentence BOS-padded id streams; ids of real tokens only are scored.
    fn sentence_ids(&self, doc: &TokenizedText) -> Vec<Vec<u32>> {
        doc.sentences
            .iter()
            .map(|range| {
                let mut ids = vec![BOS; self.order - 1];
                ids.extend(doc.tokens[range.clone()].iter().map(|t| self.id_of(&t.lower)));
                ids
            })
            .collect()
    }

    /// Serialize to the versioned "KISLM1" binary format: sorted vocabulary,
    /// then per order the n-gram entries sorted by id sequence. Context
    /// totals are derived on load.
    pub fn save<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        binio::write_u32(w, self.order as u32)?;
        binio::write_f64(w, self.add_k)?;
        binio::write_u64(w, self.vocab.len() as u64)?;
        for word in &self.vocab {
            binio::write_str(w, word)?;
        }
        for table in &self.counts {
            let sorted: BTreeMap<&Vec<u32>, u64> =
                table.iter().map(|(k, &v)| (k, v)).collect();
            binio::write_u64(w, sorted.len() as u64)?;
            for (gram, count) in sorted {
                for &id in gram {
                    binio::write_u32(w, id)?;
                }
                binio::write_u64(w, count)?;
            }
        }
        Ok(())
    }

    pub fn save_to_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.save(&mut file)
    }

    pub fn load<R: Read>(r: &mut R) -> Result<Self> {
        binio::expect_magic(r, MAGIC)?;
        let order = binio::read_u32(r)? as usize;
        if order == 0 {
            return Err(KisError::Parse("model order 0".into()));
        }
        let add_k = binio::read_f64(r)?;
        if !(add_k >= 0.0) {
            return Err(KisError::Parse(format!("bad smoothing constant {add_k}")));
        }
        let vocab_len = binio::read_u64(r)? as usize;
        let mut vocab = Vec::with_capacity(vocab_len);
        for _ in 0..vocab_len {
            vocab.push(binio::read_str(r)?);
        }
        let ids: HashMap<String, u32> = vocab
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32 + WORD_BASE))
            .collect();
        let mut counts = Vec::with_capacity(order);
        let mut totals = Vec::with_capacity(order);
        for n in 1..=order {
            let entries = binio::read_u64(r)? as usize;
            let mut table: HashMap<Vec<u32>, u64> = HashMap::with_capacity(entries);
            let mut total: HashMap<Vec<u32>, u64> = HashMap::new();
            for _ in 0..entries {
                let mut gram = Vec::with_capacity(n);
                for _ in 0..n {
                    gram.push(binio::read_u32(r)?);
                }
                let count = binio::read_u64(r)?;
                *total.entry(gram[..n - 1].to_vec()).or_insert(0) += count;
                table.insert(gram, count);
            }
            counts.push(table);
            totals.push(total);
        }
        Ok(Self {
            order,
            add_k,
            vocab,
            ids,
            counts,
            totals,
        })
    }

    pub fn load_from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::load(&mut file)
    }
}

impl LanguageModel for NGramLM {
    fn avg_log_likelihood(&self, doc: &TokenizedText) -> f64 {
        let mut total = 0.0;
        let mut tokens = 0usize;
        let pad = self.order - 1;
        for ids in self.sentence_ids(doc) {
            for i in pad..ids.len() {
                let ctx = &ids[i - pad..i];
                total += ln(self.prob(ctx, ids[i]));
                tokens += 1;
            }
        }
        if tokens == 0 {
            return 0.0;
        }
        total / tokens as f64
    }
}

/// Train an interpolated add-k model. `add_k = 0` yields the unsmoothed
/// maximum-likelihood model, which assigns probability 0 (log-likelihood
/// −∞) to unseen tokens; any positive `add_k` keeps likelihoods finite.
pub fn train_ngram_lm(corpus: &[TokenizedText], order: usize, add_k: f64) -> Result<NGramLM> {
    if corpus.is_empty() {
        return Err(KisError::EmptyCorpus);
    }
    if order == 0 {
        return Err(KisError::InvalidConfig("order must be ≥ 1".into()));
    }
    if !(add_k >= 0.0) || !add_k.is_finite() {
        return Err(KisError::InvalidConfig(format!(
            "add_k must be finite and ≥ 0, got {add_k}"
        )));
    }

    let vocab_set: BTreeSet<String> = corpus
        .iter()
        .flat_map(|doc| doc.tokens.iter().map(|t| t.lower.clone()))
        .collect();
    let vocab: Vec<String> = vocab_set.into_iter().collect();
    let ids: HashMap<String, u32> = vocab
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i as u32 + WORD_BASE))
        .collect();

    let mut counts: Vec<HashMap<Vec<u32>, u64>> = vec![HashMap::new(); order];
    let mut totals: Vec<HashMap<Vec<u32>, u64>> = vec![HashMap::new(); order];

    for doc in corpus {
        for range in &doc.sentences {
            let mut stream = vec![BOS; order - 1];
            stream.extend(doc.tokens[range.clone()].iter().map(|t| ids[&t.lower]));
            // Predict each real token from up to order−1 context tokens.
            for i in (order - 1)..stream.len() {
                for n in 1..=order {
                    let gram = stream[i + 1 - n..=i].to_vec();
                    *totals[n - 1].entry(gram[..n - 1].to_vec()).or_insert(0) += 1;
                    *counts[n - 1].entry(gram).or_insert(0) += 1;
                }
            }
        }
    }

    Ok(NGramLM {
        order,
        add_k,
        vocab,
        ids,
        counts,
        totals,
    })
}

/// Train from UTF-8 text, one paragraph per line; blank lines skipped.
pub fn train_ngram_lm_from_reader<R: BufRead>(
    reader: R,
    order: usize,
    add_k: f64,
    stopwords: &StopwordList,
) -> Result<NGramLM> {
    let mut corpus = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        corpus.push(tokenize(&line, stopwords)?);
    }
    train_ngram_lm(&corpus, order, add_k)
}
