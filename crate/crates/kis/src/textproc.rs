//! Deterministic tokenization, sentence splitting, syllable counting,
//! stopword tagging, and heuristic entity extraction.
//!
//! Every score in the crate consumes [`TokenizedText`]; keeping the rules
//! here fixed keeps all downstream numbers reproducible.

use std::collections::{BTreeSet, HashSet};
use std::io::BufRead;
use std::ops::Range;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{KisError, Result};
use crate::simplicity::ZipfTable;

/// Token classes. Numbers are kept distinct from words because readability
/// and lexical-frequency scores treat them differently.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Number,
    Punctuation,
}

/// A single token with the flags the scores need.
#[derive(Debug, Clone)]
pub struct Token {
    /// Exact surface form as it appears in the raw text.
    pub surface: String,
    /// Casefolded surface.
    pub lower: String,
    pub kind: TokenKind,
    /// Heuristic syllable count: >= 1 for words, 1 for numbers, 0 for punctuation.
    pub syllables: usize,
    pub is_stopword: bool,
    pub is_capitalized: bool,
    /// True for the first word or number token of each sentence.
    pub is_sentence_initial: bool,
}

impl Token {
    pub fn is_wordlike(&self) -> bool {
        matches!(self.kind, TokenKind::Word | TokenKind::Number)
    }
}

/// A paragraph with sentence boundaries and token annotations.
#[derive(Debug, Clone)]
pub struct TokenizedText {
    pub raw: String,
    /// Token-index ranges; disjoint, contiguous, covering all tokens.
    pub sentences: Vec<Range<usize>>,
    pub tokens: Vec<Token>,
}

impl TokenizedText {
    /// Tokens of one sentence.
    pub fn sentence_tokens(&self, sentence: usize) -> &[Token] {
        &self.tokens[self.sentences[sentence].clone()]
    }

    /// Number of word and number tokens.
    pub fn word_count(&self) -> usize {
        self.tokens.iter().filter(|t| t.is_wordlike()).count()
    }

    /// Set of casefolded content words: word tokens that are not stopwords.
    /// Numbers and punctuation are excluded.
    pub fn content_words(&self) -> BTreeSet<String> {
        self.tokens
            .iter()
            .filter(|t| t.kind == TokenKind::Word && !t.is_stopword)
            .map(|t| t.lower.clone())
            .collect()
    }
}

/// Casefolded word set used for stopword tagging and cloze masking.
#[derive(Debug, Clone)]
pub struct StopwordList {
    words: HashSet<String>,
}

impl StopwordList {
    /// Build from casefolded words. Errors when the iterator yields nothing.
    pub fn new<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words: HashSet<String> = words
            .into_iter()
            .map(|w| w.as_ref().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        if words.is_empty() {
            return Err(KisError::InvalidConfig("stopword list is empty".into()));
        }
        Ok(Self { words })
    }

    /// Load from UTF-8 text, one word per line; '#' starts a comment.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut words = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let entry = line.split('#').next().unwrap_or("").trim();
            if !entry.is_empty() {
                words.push(entry.to_string());
            }
        }
        Self::new(words)
    }

    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    /// The bundled English function-word list.
    pub fn bundled() -> &'static StopwordList {
        static LIST: OnceLock<StopwordList> = OnceLock::new();
        LIST.get_or_init(|| {
            Self::from_reader(crate::bundled::STOPWORDS.as_bytes())
                .expect("bundled stopword list parses")
        })
    }

    /// Membership test; `word` must already be casefolded.
    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Set of normalized (casefolded, whitespace-collapsed) entity spans.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntitySet {
    entities: BTreeSet<String>,
}

impl EntitySet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert a span, normalizing case and internal whitespace.
    pub fn insert(&mut self, span: &str) {
        let normalized = span.split_whitespace().collect::<Vec<_>>().join(" ");
        if !normalized.is_empty() {
            self.entities.insert(normalized.to_lowercase());
        }
    }

    pub fn contains(&self, span: &str) -> bool {
        self.entities.contains(span)
    }

    /// Spans in `self` absent from `other`.
    pub fn difference(&self, other: &EntitySet) -> EntitySet {
        EntitySet {
            entities: self.entities.difference(&other.entities).cloned().collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.entities.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }
}

impl<S: AsRef<str>> FromIterator<S> for EntitySet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut set = EntitySet::new();
        for span in iter {
            set.insert(span.as_ref());
        }
        set
    }
}

/// Words that keep a following '.' from ending a sentence. Single-letter
/// words (initials like "J. Smith", acronym parts like "U.S.") are guarded
/// by length instead of by list.
const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "rev", "gen", "rep", "sen", "gov", "capt",
    "sgt", "col", "maj", "lt", "etc", "vs", "eg", "ie", "cf", "al", "inc", "ltd", "co", "corp",
    "no", "fig", "dept", "univ", "approx", "est",
];

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Heuristic syllable counter: contiguous vowel groups (a e i o u y), minus
/// one for a terminal silent 'e' (unless that would reach zero), plus one
/// when the word ends in consonant + "le". Always at least 1.
pub fn count_syllables(word: &str) -> usize {
    let chars: Vec<char> = word.to_lowercase().chars().collect();
    let mut groups = 0usize;
    let mut in_group = false;
    for &c in &chars {
        if is_vowel(c) {
            if !in_group {
                groups += 1;
                in_group = true;
            }
        } else {
            in_group = false;
        }
    }
    let n = chars.len();
    if n > 0 && chars[n - 1] == 'e' && groups > 1 {
        groups -= 1;
    }
    if n >= 3 && chars[n - 1] == 'e' && chars[n - 2] == 'l' && !is_vowel(chars[n - 3]) {
        groups += 1;
    }
    groups.max(1)
}

#[derive(Debug)]
struct RawToken {
    text: String,
    kind: TokenKind,
    /// Whitespace separates this token from the previous one in raw.
    space_before: bool,
}

fn classify_char(c: char) -> TokenKind {
    if c.is_alphabetic() {
        TokenKind::Word
    } else if c.is_ascii_digit() {
        TokenKind::Number
    } else {
        TokenKind::Punctuation
    }
}

fn scan_tokens(raw: &str) -> Vec<RawToken> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut kind = TokenKind::Punctuation;
    let mut space_before = true;
    let mut pending_space = true;

    for c in raw.chars() {
        if c.is_whitespace() {
            if !current.is_empty() {
                tokens.push(RawToken {
                    text: std::mem::take(&mut current),
                    kind,
                    space_before,
                });
            }
            pending_space = true;
            continue;
        }
        let c_kind = classify_char(c);
        // Punctuation is emitted one char at a time; words and numbers as
        // maximal same-kind runs.
        let breaks = current.is_empty()
            || c_kind != kind
            || c_kind == TokenKind::Punctuation
            || pending_space;
        if breaks {
            if !current.is_empty() {
                tokens.push(RawToken {
                    text: std::mem::take(&mut current),
                    kind,
                    space_before,
                });
            }
            kind = c_kind;
            space_before = pending_space;
            pending_space = false;
        }
        current.push(c);
    }
    if !current.is_empty() {
        tokens.push(RawToken {
            text: current,
            kind,
            space_before,
        });
    }
    tokens
}

/// Tokenize a paragraph: split words on whitespace and punctuation
/// boundaries, then split sentences on terminal punctuation (. ! ?)
/// followed by whitespace and a capital, with an abbreviation guard.
///
/// Deterministic; errors with [`KisError::EmptyInput`] on whitespace-only
/// input.
pub fn tokenize(raw: &str, stopwords: &StopwordList) -> Result<TokenizedText> {
    let raw_tokens = scan_tokens(raw);
    if raw_tokens.is_empty() {
        return Err(KisError::EmptyInput);
    }

    // Sentence boundaries: token index i ends a sentence when it is . ! or ?
    // and the next token is whitespace-separated and starts with an
    // uppercase letter. A '.' after an abbreviation or single letter never
    // ends a sentence.
    let mut boundaries = vec![false; raw_tokens.len()];
    for i in 0..raw_tokens.len() {
        let t = &raw_tokens[i];
        if t.kind != TokenKind::Punctuation || !matches!(t.text.as_str(), "." | "!" | "?") {
            continue;
        }
        let Some(next) = raw_tokens.get(i + 1) else {
            continue;
        };
        let next_capital = next.text.chars().next().is_some_and(|c| c.is_uppercase());
        if !(next.space_before && next_capital) {
            continue;
        }
        if t.text == "." {
            if let Some(prev) = i.checked_sub(1).map(|j| &raw_tokens[j]) {
                if prev.kind == TokenKind::Word {
                    let lower = prev.text.to_lowercase();
                    if prev.text.chars().count() == 1 || ABBREVIATIONS.contains(&lower.as_str()) {
                        continue;
                    }
                }
            }
        }
        boundaries[i] = true;
    }

    let mut tokens = Vec::with_capacity(raw_tokens.len());
    let mut sentences = Vec::new();
    let mut sentence_start = 0usize;
    let mut initial_pending = true;

    for (i, rt) in raw_tokens.iter().enumerate() {
        let lower = rt.text.to_lowercase();
        let is_capitalized =
            rt.kind == TokenKind::Word && rt.text.chars().next().is_some_and(|c| c.is_uppercase());
        let syllables = match rt.kind {
            TokenKind::Word => count_syllables(&rt.text),
            TokenKind::Number => 1,
            TokenKind::Punctuation => 0,
        };
        let wordlike = rt.kind != TokenKind::Punctuation;
        let is_sentence_initial = wordlike && initial_pending;
        if is_sentence_initial {
            initial_pending = false;
        }
        tokens.push(Token {
            is_stopword: rt.kind == TokenKind::Word && stopwords.contains(&lower),
            surface: rt.text.clone(),
            lower,
            kind: rt.kind,
            syllables,
            is_capitalized,
            is_sentence_initial,
        });
        if boundaries[i] {
            sentences.push(sentence_start..i + 1);
            sentence_start = i + 1;
            initial_pending = true;
        }
    }
    if sentence_start < tokens.len() {
        sentences.push(sentence_start..tokens.len());
    }

    Ok(TokenizedText {
        raw: raw.to_string(),
        sentences,
        tokens,
    })
}

/// Extract entity spans: maximal runs of consecutive qualifying tokens,
/// normalized by casefolding. A token qualifies when it is a number, a
/// capitalized word past the sentence start, or a capitalized
/// sentence-initial word absent from the lexicon.
pub fn extract_entities(doc: &TokenizedText, lexicon: &ZipfTable) -> EntitySet {
    let qualifies = |t: &Token| -> bool {
        match t.kind {
            TokenKind::Number => true,
            TokenKind::Word => {
                t.is_capitalized && (!t.is_sentence_initial || !lexicon.contains(&t.lower))
            }
            TokenKind::Punctuation => false,
        }
    };

    let mut set = EntitySet::new();
    let mut span: Vec<&str> = Vec::new();
    for token in &doc.tokens {
        if qualifies(token) {
            span.push(&token.lower);
        } else if !span.is_empty() {
            set.insert(&span.join(" "));
            span.clear();
        }
    }
    if !span.is_empty() {
        set.insert(&span.join(" "));
    }
    set
}
