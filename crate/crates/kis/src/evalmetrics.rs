//! Corpus evaluation: SARI, BLEU, %FKGL, compression, and mean coverage.
//!
//! SARI conventions frozen here (public implementations differ):
//! per n-gram order 1–4, reference counts are averaged fractionally over
//! the r references; keep and add are F1, delete is precision-only; a
//! category with no candidate and no gold n-grams scores 1; a category
//! empty on exactly one side scores 0. All category arithmetic runs on
//! integers scaled by r, so results are exact up to the final divisions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{KisError, Result};
use crate::mathx::{exp, ln};
use crate::reward::ScoreConfig;
use crate::salience::coverage;
use crate::simplicity::fkgl;
use crate::textproc::{tokenize, StopwordList};

const MAX_ORDER: usize = 4;

/// One evaluation row: a system output with its source and references.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    pub original: String,
    #[serde(rename = "simplified")]
    pub output: String,
    #[serde(default)]
    pub references: Vec<String>,
}

/// Aggregates over an evaluation corpus. sari/bleu are None when no record
/// carries references.
#[derive(Debug, Clone, Serialize)]
pub struct CorpusReport {
    /// Records that scored successfully.
    pub n: usize,
    /// Records dropped because any of their metrics errored.
    pub skipped: usize,
    pub sari: Option<f64>,
    pub bleu: Option<f64>,
    /// Percentage (0–100) of records whose output lowered the grade level.
    pub pct_fkgl: f64,
    pub mean_compression: f64,
    pub mean_coverage: f64,
}

/// Casefolded token stream for the n-gram metrics.
fn metric_tokens(text: &str, stopwords: &StopwordList) -> Result<Vec<String>> {
    let doc = tokenize(text, stopwords)?;
    Ok(doc.tokens.iter().map(|t| t.lower.clone()).collect())
}

fn ngram_counts(tokens: &[String], n: usize) -> BTreeMap<&[String], u64> {
    let mut counts: BTreeMap<&[String], u64> = BTreeMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Candidate/gold count table for one edit category at one order. Gold
/// counts carry the ×r scale.
struct Category {
    /// Σ candidate counts (unscaled).
    cand_total: u64,
    /// Σ gold counts, scaled by r.
    gold_total: u64,
    /// Σ min(candidate·r, gold·r).
    tp_scaled: u64,
}

impl Category {
    fn precision(&self, r: u64) -> f64 {
        if self.cand_total == 0 {
            return 0.0;
        }
        self.tp_scaled as f64 / (self.cand_total * r) as f64
    }

    fn recall(&self) -> f64 {
        if self.gold_total == 0 {
            return 0.0;
        }
        self.tp_scaled as f64 / self.gold_total as f64
    }

    fn is_vacuous(&self) -> bool {
        self.cand_total == 0 && self.gold_total == 0
    }

    fn f1(&self, r: u64) -> f64 {
        if self.is_vacuous() {
            return 1.0;
        }
        let p = self.precision(r);
        let rec = self.recall();
        if p + rec == 0.0 {
            return 0.0;
        }
        2.0 * p * rec / (p + rec)
    }

    fn precision_only(&self, r: u64) -> f64 {
        if self.is_vacuous() {
            return 1.0;
        }
        self.precision(r)
    }
}

/// SARI over orders 1–4 for one (original, output, references) triple.
pub fn sari(original: &str, output: &str, references: &[String]) -> Result<f64> {
    if references.is_empty() {
        return Err(KisError::NoReferences);
    }
    let stopwords = StopwordList::bundled();
    let orig = metric_tokens(original, stopwords)?;
    let out = metric_tokens(output, stopwords)?;
    let refs: Vec<Vec<String>> = references
        .iter()
        .map(|r| metric_tokens(r, stopwords))
        .collect::<Result<_>>()?;
    sari_tokens(&orig, &out, &refs)
}

/// SARI on pre-tokenized streams.
pub fn sari_tokens(original: &[String], output: &[String], references: &[Vec<String>]) -> Result<f64> {
    if references.is_empty() {
        return Err(KisError::NoReferences);
    }
    let r = references.len() as u64;
    let mut total = 0.0;
    for n in 1..=MAX_ORDER {
        let c_in = ngram_counts(original, n);
        let c_out = ngram_counts(output, n);
        // Reference counts summed raw; dividing by r is deferred via the
        // shared ×r scale.
        let mut c_ref: BTreeMap<&[String], u64> = BTreeMap::new();
        for reference in references {
            if reference.len() >= n {
                for gram in reference.windows(n) {
                    *c_ref.entry(gram).or_insert(0) += 1;
                }
            }
        }

        let mut keys: Vec<&[String]> = Vec::new();
        keys.extend(c_in.keys());
        keys.extend(c_out.keys());
        keys.extend(c_ref.keys());
        keys.sort();
        keys.dedup();

        let mut keep = Category { cand_total: 0, gold_total: 0, tp_scaled: 0 };
        let mut add = Category { cand_total: 0, gold_total: 0, tp_scaled: 0 };
        let mut del = Category { cand_total: 0, gold_total: 0, tp_scaled: 0 };
        for key in keys {
            let ci = c_in.get(key).copied().unwrap_or(0);
            let co = c_out.get(key).copied().unwrap_or(0);
            let cr_scaled = c_ref.get(key).copied().unwrap_or(0);
            let ci_scaled = ci * r;

            let keep_cand = ci.min(co);
            let keep_gold = ci_scaled.min(cr_scaled);
            keep.cand_total += keep_cand;
            keep.gold_total += keep_gold;
            keep.tp_scaled += (keep_cand * r).min(keep_gold);

            let add_cand = co.saturating_sub(ci);
            let add_gold = cr_scaled.saturating_sub(ci_scaled);
            add.cand_total += add_cand;
            add.gold_total += add_gold;
            add.tp_scaled += (add_cand * r).min(add_gold);

            let del_cand = ci.saturating_sub(co);
            let del_gold = ci_scaled.saturating_sub(cr_scaled);
            del.cand_total += del_cand;
            del.gold_total += del_gold;
            del.tp_scaled += (del_cand * r).min(del_gold);
        }

        total += (add.f1(r) + keep.f1(r) + del.precision_only(r)) / 3.0;
    }
    Ok(total / MAX_ORDER as f64)
}

/// Sentence-level BLEU, orders 1–4: unigram precision unsmoothed (no
/// overlap gives 0), higher orders add-1 smoothed with an empty candidate
/// order counting as 1, brevity penalty against the closest reference
/// length (ties to the shorter).
pub fn bleu(output: &str, references: &[String]) -> Result<f64> {
    if references.is_empty() {
        return Err(KisError::NoReferences);
    }
    let stopwords = StopwordList::bundled();
    let out = metric_tokens(output, stopwords)?;
    let refs: Vec<Vec<String>> = references
        .iter()
        .map(|r| metric_tokens(r, stopwords))
        .collect::<Result<_>>()?;
    bleu_tokens(&out, &refs)
}

/// BLEU on pre-tokenized streams.
pub fn bleu_tokens(output: &[String], references: &[Vec<String>]) -> Result<f64> {
    if references.is_empty() {
        return Err(KisError::NoReferences);
    }
    let c = output.len() as u64;
    let mut log_sum = 0.0;
    for n in 1..=MAX_ORDER {
        let cand = ngram_counts(output, n);
        let total: u64 = cand.values().sum();
        // Clip each candidate n-gram against its best per-reference count.
        let mut matched = 0u64;
        for (gram, &count) in &cand {
            let best = references
                .iter()
                .map(|r| ngram_counts(r, n).get(gram).copied().unwrap_or(0))
                .max()
                .unwrap_or(0);
            matched += count.min(best);
        }
        let p = if n == 1 {
            if matched == 0 {
                return Ok(0.0);
            }
            matched as f64 / total as f64
        } else {
            (matched + 1) as f64 / (total + 1) as f64
        };
        log_sum += ln(p);
    }
    let core = exp(log_sum / MAX_ORDER as f64);

    let r = references
        .iter()
        .map(|reference| reference.len() as u64)
        .min_by_key(|&len| (len.abs_diff(c), len))
        .expect("references non-empty");
    let bp = if c < r { exp(1.0 - r as f64 / c as f64) } else { 1.0 };
    Ok(bp * core)
}

struct RecordScores {
    sari: Option<f64>,
    bleu: Option<f64>,
    fkgl_dropped: bool,
    compression: f64,
    coverage: f64,
}

fn score_record(record: &EvalRecord, cfg: &ScoreConfig) -> Result<RecordScores> {
    let p = tokenize(&record.original, &cfg.stopwords)?;
    let q = tokenize(&record.output, &cfg.stopwords)?;
    let fkgl_original = fkgl(&p)?;
    let fkgl_output = fkgl(&q)?;
    let base = p.word_count();
    let compression = q.word_count() as f64 / base as f64;
    let cov = coverage(&p, &q, cfg.coverage_model.as_ref(), &cfg.stopwords)?;
    let (sari_value, bleu_value) = if record.references.is_empty() {
        (None, None)
    } else {
        (
            Some(sari(&record.original, &record.output, &record.references)?),
            Some(bleu(&record.output, &record.references)?),
        )
    };
    Ok(RecordScores {
        sari: sari_value,
        bleu: bleu_value,
        fkgl_dropped: fkgl_output < fkgl_original,
        compression,
        coverage: cov,
    })
}

/// Mean with a canonical summation order, so aggregates are exactly
/// permutation-invariant over records.
fn sorted_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.iter().sum::<f64>() / sorted.len() as f64
}

/// Evaluate a corpus: macro-averaged SARI/BLEU over records with
/// references, %FKGL, mean compression, mean coverage. Records that fail
/// any of their metrics are skipped and counted.
pub fn corpus_report(records: &[EvalRecord], cfg: &ScoreConfig) -> Result<CorpusReport> {
    if records.is_empty() {
        return Err(KisError::EmptyCorpus);
    }
    let mut saris = Vec::new();
    let mut bleus = Vec::new();
    let mut compressions = Vec::new();
    let mut coverages = Vec::new();
    let mut dropped = 0usize;
    let mut skipped = 0usize;
    for record in records {
        match score_record(record, cfg) {
            Ok(scores) => {
                if let Some(s) = scores.sari {
                    saris.push(s);
                }
                if let Some(b) = scores.bleu {
                    bleus.push(b);
                }
                if scores.fkgl_dropped {
                    dropped += 1;
                }
                compressions.push(scores.compression);
                coverages.push(scores.coverage);
            }
            Err(_) => skipped += 1,
        }
    }
    let n = compressions.len();
    if n == 0 {
        return Err(KisError::Parse(format!(
            "all {} records failed to score",
            records.len()
        )));
    }
    Ok(CorpusReport {
        n,
        skipped,
        sari: (!saris.is_empty()).then(|| sorted_mean(&saris)),
        bleu: (!bleus.is_empty()).then(|| sorted_mean(&bleus)),
        pct_fkgl: 100.0 * dropped as f64 / n as f64,
        mean_compression: sorted_mean(&compressions),
        mean_coverage: sorted_mean(&coverages),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluency::train_ngram_lm;
    use crate::textproc::TokenizedText;
    use std::sync::Arc;

    fn refs(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn sari_requires_references() {
        assert!(matches!(
            sari("the cat", "the cat", &[]),
            Err(KisError::NoReferences)
        ));
        assert!(matches!(
            bleu("the cat", &[]),
            Err(KisError::NoReferences)
        ));
    }

    #[test]
    fn sari_perfect_when_output_matches_reference() {
        let score = sari(
            "The physician administered the medication.",
            "The doctor gave the medicine.",
            &refs(&["The doctor gave the medicine."]),
        )
        .unwrap();
        assert_eq!(score, 1.0);
    }

    #[test]
    fn sari_identity_triple_is_one() {
        let text = "the cat sat on the mat.";
        assert_eq!(sari(text, text, &refs(&[text])).unwrap(), 1.0);
    }

    #[test]
    fn sari_reference_order_invariant() {
        let original = "the large cat sat on the mat today.";
        let output = "the big cat sat on the mat.";
        let a = refs(&["the big cat sat there.", "a large cat sat on the mat."]);
        let b = refs(&["a large cat sat on the mat.", "the big cat sat there."]);
        let sa = sari(original, output, &a).unwrap();
        let sb = sari(original, output, &b).unwrap();
        assert_eq!(sa.to_bits(), sb.to_bits());
    }

    #[test]
    fn sari_in_unit_interval_on_disjoint_texts() {
        let score = sari(
            "alpha beta gamma delta",
            "epsilon zeta eta theta",
            &refs(&["iota kappa lambda mu"]),
        )
        .unwrap();
        assert!((0.0..=1.0).contains(&score));
    }

    #[test]
    fn bleu_identity_is_one() {
        let text = "the cat sat on the mat.";
        assert_eq!(bleu(text, &refs(&[text])).unwrap(), 1.0);
    }

    #[test]
    fn bleu_zero_without_unigram_overlap() {
        assert_eq!(
            bleu("alpha beta gamma", &refs(&["delta epsilon zeta"])).unwrap(),
            0.0
        );
    }

    #[test]
    fn bleu_prefix_gets_brevity_penalty() {
        // Output is a strict prefix at half the reference length: every
        // precision term is 1, leaving exactly the penalty e^(1−2).
        let score = bleu("alpha beta", &refs(&["alpha beta gamma delta"])).unwrap();
        assert!((score - exp(-1.0)).abs() < 1e-12, "got {score}");
    }

    #[test]
    fn bleu_tie_breaks_to_shorter_reference() {
        // Candidate length 3; references at lengths 2 and 4 tie on
        // distance, so r = 2 and no penalty applies (c > r).
        let out: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let near_short: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let near_long: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let score = bleu_tokens(&out, &[near_short, near_long]).unwrap();
        let unpenalized = bleu_tokens(
            &out,
            &[["a", "b", "c"].iter().map(|s| s.to_string()).collect()],
        )
        .unwrap();
        assert!(score <= unpenalized);
        // Direct check: the brevity factor is 1 (no e^negative applied).
        let with_only_long = bleu_tokens(
            &out,
            &[["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect()],
        )
        .unwrap();
        assert!(score >= with_only_long);
    }

    fn test_config() -> ScoreConfig {
        let stopwords = StopwordList::bundled();
        let corpus: Vec<TokenizedText> = [
            "The cat sat on the mat.",
            "People like short and clear news.",
        ]
        .iter()
        .map(|s| tokenize(s, stopwords).unwrap())
        .collect();
        ScoreConfig::with_lm(Arc::new(train_ngram_lm(&corpus, 3, 0.1).unwrap()))
    }

    fn record(id: &str, original: &str, output: &str, references: &[&str]) -> EvalRecord {
        EvalRecord {
            id: id.to_string(),
            original: original.to_string(),
            output: output.to_string(),
            references: refs(references),
        }
    }

    #[test]
    fn identity_corpus_report() {
        let cfg = test_config();
        let records = vec![
            record("a", "The committee deliberated extensively.", "The committee deliberated extensively.", &[]),
            record("b", "Scientists discovered ancient fossils yesterday.", "Scientists discovered ancient fossils yesterday.", &[]),
        ];
        let report = corpus_report(&records, &cfg).unwrap();
        assert_eq!(report.n, 2);
        assert_eq!(report.skipped, 0);
        assert_eq!(report.pct_fkgl, 0.0);
        assert_eq!(report.mean_compression, 1.0);
        assert_eq!(report.mean_coverage, 1.0);
        assert_eq!(report.sari, None);
        assert_eq!(report.bleu, None);
    }

    #[test]
    fn simpler_output_scores_full_pct_fkgl() {
        let cfg = test_config();
        let records = vec![record(
            "a",
            "Municipal administrators contemplated extraordinary infrastructure renovations.",
            "City leaders planned big road fixes.",
            &["City leaders planned big road fixes."],
        )];
        let report = corpus_report(&records, &cfg).unwrap();
        assert_eq!(report.pct_fkgl, 100.0);
        assert_eq!(report.sari, Some(1.0));
        assert_eq!(report.bleu, Some(1.0));
    }

    #[test]
    fn failing_records_are_skipped_with_count() {
        let cfg = test_config();
        let records = vec![
            record("ok", "The cat sat on the mat today.", "The cat sat today.", &[]),
            record("bad", "...", "The cat sat.", &[]),
        ];
        let report = corpus_report(&records, &cfg).unwrap();
        assert_eq!(report.n, 1);
        assert_eq!(report.skipped, 1);
    }

    #[test]
    fn empty_corpus_rejected() {
        let cfg = test_config();
        assert!(matches!(
            corpus_report(&[], &cfg),
            Err(KisError::EmptyCorpus)
        ));
    }

    #[test]
    fn report_permutation_invariant() {
        let cfg = test_config();
        let mut records = vec![
            record("a", "Municipal administrators contemplated renovations.", "City leaders planned fixes.", &["City leaders planned fixes."]),
            record("b", "The cat sat on the mat today.", "The cat sat today.", &["The cat sat down today."]),
            record("c", "Scientists discovered ancient fossils yesterday.", "Scientists found old bones.", &["Scientists found old fossils."]),
        ];
        let forward = corpus_report(&records, &cfg).unwrap();
        records.reverse();
        let backward = corpus_report(&records, &cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&forward).unwrap(),
            serde_json::to_string(&backward).unwrap()
        );
    }

    #[test]
    fn eval_record_parses_jsonl_schema() {
        let line = r#"{"id":"x","original":"The cat.","simplified":"A cat.","references":["The cat."]}"#;
        let record: EvalRecord = serde_json::from_str(line).unwrap();
        assert_eq!(record.output, "A cat.");
        assert_eq!(record.references.len(), 1);
        let no_refs = r#"{"id":"y","original":"A.","simplified":"B."}"#;
        let record: EvalRecord = serde_json::from_str(no_refs).unwrap();
        assert!(record.references.is_empty());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn token_stream() -> impl Strategy<Value = Vec<String>> {
            proptest::collection::vec("[abcd]", 1..8)
        }

        proptest! {
            #![proptest_config(proptest::prelude::ProptestConfig::with_cases(128))]

            #[test]
            fn sari_bounded(orig in token_stream(), out in token_stream(), reference in token_stream()) {
                let s = sari_tokens(&orig, &out, &[reference]).unwrap();
                prop_assert!((0.0..=1.0).contains(&s));
            }

            #[test]
            fn bleu_bounded(out in token_stream(), reference in token_stream()) {
                let b = bleu_tokens(&out, &[reference]).unwrap();
                prop_assert!((0.0..=1.0).contains(&b));
            }

            #[test]
            fn matching_every_reference_is_perfect(tokens in token_stream(), orig in token_stream()) {
                let s = sari_tokens(&orig, &tokens, &[tokens.clone(), tokens.clone()]).unwrap();
                prop_assert_eq!(s, 1.0);
                let b = bleu_tokens(&tokens, &[tokens.clone()]).unwrap();
                prop_assert_eq!(b, 1.0);
            }
        }
    }
}
