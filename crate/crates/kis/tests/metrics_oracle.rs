//! Brute-force oracle equivalence for SARI and BLEU.
//!
//! The oracle recomputes both metrics from first principles: naive
//! whitespace tokenization, quadratic n-gram counting over explicit gram
//! lists, and the frozen category formulas. Library results must match
//! bitwise on hand-sized triples, so the sliding-window/sorted-map
//! implementation cannot drift from the definition. The triples use plain
//! space-separated lowercase words so both tokenizers agree on the stream.

use kis::evalmetrics::{bleu, sari};
use kis::mathx::{exp, ln};

type Gram = Vec<String>;

fn toks(text: &str) -> Vec<String> {
    text.split_whitespace().map(|w| w.to_lowercase()).collect()
}

fn grams(tokens: &[String], n: usize) -> Vec<Gram> {
    let mut out = Vec::new();
    if tokens.len() >= n {
        for i in 0..=tokens.len() - n {
            out.push(tokens[i..i + n].to_vec());
        }
    }
    out
}

fn count_of(list: &[Gram], gram: &Gram) -> u64 {
    list.iter().filter(|g| *g == gram).count() as u64
}

fn distinct_union(lists: &[&Vec<Gram>]) -> Vec<Gram> {
    let mut universe: Vec<Gram> = Vec::new();
    for list in lists {
        for gram in list.iter() {
            if !universe.contains(gram) {
                universe.push(gram.clone());
            }
        }
    }
    universe
}

/// keep/add F1 and delete precision over ×r-scaled integer tallies, with
/// the both-sides-empty category scoring 1 and one-side-empty scoring 0.
struct Tally {
    cand: u64,
    gold_scaled: u64,
    tp_scaled: u64,
}

impl Tally {
    fn precision(&self, r: u64) -> f64 {
        if self.cand == 0 {
            return 0.0;
        }
        self.tp_scaled as f64 / (self.cand * r) as f64
    }

    fn f1(&self, r: u64) -> f64 {
        if self.cand == 0 && self.gold_scaled == 0 {
            return 1.0;
        }
        let p = self.precision(r);
        let rec = if self.gold_scaled == 0 {
            0.0
        } else {
            self.tp_scaled as f64 / self.gold_scaled as f64
        };
        if p + rec == 0.0 {
            return 0.0;
        }
        2.0 * p * rec / (p + rec)
    }

    fn precision_only(&self, r: u64) -> f64 {
        if self.cand == 0 && self.gold_scaled == 0 {
            return 1.0;
        }
        self.precision(r)
    }
}

fn sari_oracle(original: &str, output: &str, references: &[&str]) -> f64 {
    let orig = toks(original);
    let out = toks(output);
    let refs: Vec<Vec<String>> = references.iter().map(|r| toks(r)).collect();
    let r = refs.len() as u64;

    let mut total = 0.0;
    for n in 1..=4 {
        let g_in = grams(&orig, n);
        let g_out = grams(&out, n);
        let g_refs: Vec<Vec<Gram>> = refs.iter().map(|t| grams(t, n)).collect();

        let mut lists: Vec<&Vec<Gram>> = vec![&g_in, &g_out];
        lists.extend(g_refs.iter());
        let universe = distinct_union(&lists);

        let mut keep = Tally { cand: 0, gold_scaled: 0, tp_scaled: 0 };
        let mut add = Tally { cand: 0, gold_scaled: 0, tp_scaled: 0 };
        let mut del = Tally { cand: 0, gold_scaled: 0, tp_scaled: 0 };
        for gram in &universe {
            let ci = count_of(&g_in, gram);
            let co = count_of(&g_out, gram);
            let cr: u64 = g_refs.iter().map(|list| count_of(list, gram)).sum();

            let keep_cand = ci.min(co);
            let keep_gold = (ci * r).min(cr);
            keep.cand += keep_cand;
            keep.gold_scaled += keep_gold;
            keep.tp_scaled += (keep_cand * r).min(keep_gold);

            let add_cand = co.saturating_sub(ci);
            let add_gold = cr.saturating_sub(ci * r);
            add.cand += add_cand;
            add.gold_scaled += add_gold;
            add.tp_scaled += (add_cand * r).min(add_gold);

            let del_cand = ci.saturating_sub(co);
            let del_gold = (ci * r).saturating_sub(cr);
            del.cand += del_cand;
            del.gold_scaled += del_gold;
            del.tp_scaled += (del_cand * r).min(del_gold);
        }
        total += (add.f1(r) + keep.f1(r) + del.precision_only(r)) / 3.0;
    }
    total / 4.0
}

fn bleu_oracle(output: &str, references: &[&str]) -> f64 {
    let out = toks(output);
    let refs: Vec<Vec<String>> = references.iter().map(|r| toks(r)).collect();
    let c = out.len() as u64;

    let mut log_sum = 0.0;
    for n in 1..=4 {
        let g_out = grams(&out, n);
        let total = g_out.len() as u64;
        let universe = distinct_union(&[&g_out]);
        let mut matched = 0u64;
        for gram in &universe {
            let count = count_of(&g_out, gram);
            let best = refs
                .iter()
                .map(|reference| count_of(&grams(reference, n), gram))
                .max()
                .unwrap_or(0);
            matched += count.min(best);
        }
        let p = if n == 1 {
            if matched == 0 {
                return 0.0;
            }
            matched as f64 / total as f64
        } else {
            (matched + 1) as f64 / (total + 1) as f64
        };
        log_sum += ln(p);
    }
    let core = exp(log_sum / 4.0);

    let mut closest = refs[0].len() as u64;
    for reference in &refs[1..] {
        let len = reference.len() as u64;
        let better = len.abs_diff(c) < closest.abs_diff(c)
            || (len.abs_diff(c) == closest.abs_diff(c) && len < closest);
        if better {
            closest = len;
        }
    }
    let bp = if c < closest {
        exp(1.0 - closest as f64 / c as f64)
    } else {
        1.0
    };
    bp * core
}

/// (original, output, references) - plain lowercase, whitespace-separated.
const TRIPLES: [(&str, &str, &[&str]); 10] = [
    (
        "the cat sat on the mat",
        "the cat sat on the mat",
        &["the cat sat on the mat"],
    ),
    (
        "the physician gave the medication",
        "the doctor gave the medicine",
        &["the doctor gave the medicine"],
    ),
    (
        "the doctor administered the medication",
        "the doctor gave the medicine",
        &["the doctor gave the medicine", "the doctor gave the drug"],
    ),
    (
        "a large cat sat",
        "a big cat sat",
        &["a big cat sat", "a huge cat sat", "a big cat rested"],
    ),
    (
        "alpha beta gamma",
        "delta epsilon zeta",
        &["eta theta iota"],
    ),
    (
        "the very large black cat",
        "the large cat",
        &["the big cat", "the large cat"],
    ),
    (
        "very very very big dog",
        "very big dog",
        &["very big dog", "very very big dog"],
    ),
    (
        "the budget was 2021 dollars",
        "the budget was small",
        &["the budget was tiny", "the budget was small"],
    ),
    ("running", "run", &["run"]),
    (
        "municipal administrators contemplated the renovation of the crumbling library infrastructure",
        "city leaders thought about fixing the old library",
        &[
            "city leaders considered fixing the old library",
            "city officials thought about repairing the old library building",
        ],
    ),
];

fn owned(refs: &[&str]) -> Vec<String> {
    refs.iter().map(|r| r.to_string()).collect()
}

#[test]
fn sari_matches_oracle_bitwise() {
    for (original, output, references) in TRIPLES {
        let lib = sari(original, output, &owned(references)).unwrap();
        let oracle = sari_oracle(original, output, references);
        assert_eq!(
            lib.to_bits(),
            oracle.to_bits(),
            "sari mismatch on ({original:?}, {output:?}): lib {lib} vs oracle {oracle}"
        );
        assert!((0.0..=1.0).contains(&lib));
    }
}

#[test]
fn bleu_matches_oracle_bitwise() {
    for (_, output, references) in TRIPLES {
        let lib = bleu(output, &owned(references)).unwrap();
        let oracle = bleu_oracle(output, references);
        assert_eq!(
            lib.to_bits(),
            oracle.to_bits(),
            "bleu mismatch on {output:?}: lib {lib} vs oracle {oracle}"
        );
        assert!((0.0..=1.0).contains(&lib));
    }
}

#[test]
fn known_endpoints() {
    // Output identical to a reference is a perfect simplification.
    let (original, output, references) = TRIPLES[1];
    assert_eq!(sari(original, output, &owned(references)).unwrap(), 1.0);
    assert_eq!(bleu(output, &owned(references)).unwrap(), 1.0);
    // Single-word output=reference: orders above the length are vacuous.
    let (original, output, references) = TRIPLES[8];
    assert_eq!(sari(original, output, &owned(references)).unwrap(), 1.0);
    // Zero unigram overlap pins BLEU to 0.
    let (_, output, references) = TRIPLES[4];
    assert_eq!(bleu(output, &owned(references)).unwrap(), 0.0);
}
