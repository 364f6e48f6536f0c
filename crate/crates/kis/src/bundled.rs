//! Bundled data: stopwords, a sample Zipf lexicon, a small news-style
//! corpus, and the toy substitution task. All compiled in so the library
//! works without external files.

use std::sync::{Arc, OnceLock};

use crate::error::Result;
use crate::fluency::{train_ngram_lm, NGramLM};
use crate::textproc::{tokenize, StopwordList, TokenizedText};

pub const STOPWORDS: &str = include_str!("../data/stopwords.txt");
pub const ZIPF_TABLE: &str = include_str!("../data/zipf_en_sample.tsv");
pub const NEWS_SAMPLE: &str = include_str!("../data/news_sample.txt");
pub const SUBSTITUTIONS: &str = include_str!("../data/substitutions.tsv");
pub const TOY_INPUTS: &str = include_str!("../data/toy_inputs.txt");

fn paragraphs(text: &str) -> Vec<TokenizedText> {
    let stopwords = StopwordList::bundled();
    text.lines()
        .filter(|line| !line.trim().is_empty())
        .map(|line| tokenize(line, stopwords).expect("bundled text tokenizes"))
        .collect()
}

/// The news-style sample corpus, one pre-tokenized paragraph per line.
pub fn news_corpus() -> &'static [TokenizedText] {
    static CORPUS: OnceLock<Vec<TokenizedText>> = OnceLock::new();
    CORPUS.get_or_init(|| paragraphs(NEWS_SAMPLE))
}

/// Inputs for the toy substitution task, pre-tokenized.
pub fn toy_inputs() -> &'static [TokenizedText] {
    static INPUTS: OnceLock<Vec<TokenizedText>> = OnceLock::new();
    INPUTS.get_or_init(|| paragraphs(TOY_INPUTS))
}

/// Trigram model with add-0.1 smoothing over the bundled news corpus; the
/// default language model when no trained one is supplied.
pub fn default_lm() -> Arc<NGramLM> {
    static LM: OnceLock<Arc<NGramLM>> = OnceLock::new();
    LM.get_or_init(|| {
        Arc::new(train_ngram_lm(news_corpus(), 3, 0.1).expect("bundled corpus is non-empty"))
    })
    .clone()
}

/// `ScoreConfig` over all bundled data and the default language model.
pub fn default_score_config() -> crate::reward::ScoreConfig {
    crate::reward::ScoreConfig::with_lm(default_lm())
}

/// Check the bundled artifacts against each other; returns the first
/// inconsistency. Exercised by tests so data edits fail loudly.
pub fn verify_bundled_data() -> Result<()> {
    use crate::error::KisError;
    use crate::kscst::ToyLexicalPolicy;
    use crate::simplicity::ZipfTable;

    let zipf = ZipfTable::bundled();
    // Toy-task vocabulary must be lexicon-covered: a sentence-initial
    // capitalized word missing from the lexicon would read as an entity
    // and poison the inaccuracy guardrail during training.
    for doc in toy_inputs() {
        for token in doc.tokens.iter().filter(|t| t.is_wordlike()) {
            if !zipf.contains(&token.lower) {
                return Err(KisError::InvalidConfig(format!(
                    "toy input word {:?} missing from bundled lexicon",
                    token.lower
                )));
            }
        }
    }
    let policy = ToyLexicalPolicy::bundled()?;
    for word in policy.words() {
        for candidate in policy.candidates_for(word).expect("word is in table") {
            if !zipf.contains(candidate) {
                return Err(KisError::InvalidConfig(format!(
                    "substitution candidate {candidate:?} missing from bundled lexicon"
                )));
            }
        }
    }
    Ok(())
}
