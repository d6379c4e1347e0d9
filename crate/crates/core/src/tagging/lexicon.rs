use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Prediction, LEXICON_TAGGER_ID};
use crate::annotation::{is_punctuation_token, tokenize, EntityLabel, EntitySpan, Token};

const DEFAULT_LEXICON: &str = include_str!("default_lexicon.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub pattern: Vec<String>,
    pub label: EntityLabel,
    pub confidence: f64,
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("entry {index}: pattern is empty")]
    EmptyPattern { index: usize },
    #[error("entry {index}: pattern word `{word}` is not a single word token")]
    BadWord { index: usize, word: String },
    #[error("entry {index}: confidence {confidence} outside [0, 1]")]
    BadConfidence { index: usize, confidence: f64 },
    #[error("entry {index}: duplicate pattern {pattern:?} for {label}")]
    Duplicate { index: usize, pattern: Vec<String>, label: EntityLabel },
    #[error("reading lexicon: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing lexicon: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Phrase patterns matched case-insensitively against word tokens.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    // normalized pattern -> index of the first entry with that pattern
    index: HashMap<Vec<String>, usize>,
    max_len: usize,
}

fn normalize(word: &str) -> String {
    word.replace('\u{2019}', "'").to_lowercase()
}

impl Lexicon {
    pub fn new(entries: Vec<LexiconEntry>) -> Result<Self, LexiconError> {
        let mut index = HashMap::new();
        let mut seen = HashSet::new();
        let mut max_len = 0;
        for (i, entry) in entries.iter().enumerate() {
            if entry.pattern.is_empty() {
                return Err(LexiconError::EmptyPattern { index: i });
            }
            for word in &entry.pattern {
                let toks = tokenize(word);
                if toks.len() != 1 || is_punctuation_token(&toks[0]) || toks[0].text != *word {
                    return Err(LexiconError::BadWord { index: i, word: word.clone() });
                }
            }
            if !(0.0..=1.0).contains(&entry.confidence) {
                return Err(LexiconError::BadConfidence { index: i, confidence: entry.confidence });
            }
            let key: Vec<String> = entry.pattern.iter().map(|w| normalize(w)).collect();
            if !seen.insert((key.clone(), entry.label)) {
                return Err(LexiconError::Duplicate { index: i, pattern: entry.pattern.clone(), label: entry.label });
            }
            max_len = max_len.max(key.len());
            index.entry(key).or_insert(i);
        }
        Ok(Lexicon { entries, index, max_len })
    }

    /// The bundled lexicon of common praise phrases.
    pub fn default_praise() -> Self {
        Self::from_json(DEFAULT_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn from_json(json: &str) -> Result<Self, LexiconError> {
        Self::new(serde_json::from_str(json)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    /// Greedy left-to-right longest match over `tokens`. When several entries
    /// share the longest matching pattern, the first one listed wins.
    pub fn match_tokens(&self, tokens: &[Token]) -> Vec<EntitySpan> {
        let words: Vec<Option<String>> =
            tokens.iter().map(|t| (!is_punctuation_token(t)).then(|| normalize(&t.text))).collect();
        let mut spans = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let longest = (1..=self.max_len.min(words.len() - i)).rev().find_map(|len| {
                let window: Option<Vec<String>> = words[i..i + len].iter().cloned().collect();
                window.and_then(|key| self.index.get(&key)).map(|&entry| (len, entry))
            });
            match longest {
                Some((len, entry)) => {
                    let e = &self.entries[entry];
                    spans.push(EntitySpan::new(e.label, i, i + len).with_confidence(e.confidence));
                    i += len;
                }
                None => i += 1,
            }
        }
        spans
    }
}

pub fn lexicon_tag(response_id: &str, text: &str, lexicon: &Lexicon) -> Prediction {
    Prediction {
        response_id: response_id.to_string(),
        spans: lexicon.match_tokens(&tokenize(text)),
        tagger_id: LEXICON_TAGGER_ID.to_string(),
        latency_ms: 0,
    }
}
