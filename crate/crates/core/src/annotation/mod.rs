//! Canonical data model: tokens, entity spans, BIO tag sequences and
//! annotated tutor responses.
//!
//! Offsets on [`Token`] are counted in Unicode scalar values (`char`s), not
//! bytes, so a highlight computed here lines up with the same text in any
//! client that indexes by code point.

mod bio;
mod tokenize;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use bio::{repair_bio, spans_to_tags, tags_to_spans, validate_bio, Violation, ViolationKind};
pub use tokenize::{is_punctuation_token, tokenize};

/// Praise category attached to an entity span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityLabel {
    Effort,
    Outcome,
    /// Representable for forward compatibility; too rare in practice to score.
    Person,
}

impl EntityLabel {
    pub const ALL: [EntityLabel; 3] = [EntityLabel::Effort, EntityLabel::Outcome, EntityLabel::Person];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityLabel::Effort => "Effort",
            EntityLabel::Outcome => "Outcome",
            EntityLabel::Person => "Person",
        }
    }

    pub fn is_experimental(self) -> bool {
        matches!(self, EntityLabel::Person)
    }
}

impl fmt::Display for EntityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityLabel {
    type Err = AnnotationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Effort" => Ok(EntityLabel::Effort),
            "Outcome" => Ok(EntityLabel::Outcome),
            "Person" => Ok(EntityLabel::Person),
            other => Err(AnnotationError::UnknownLabel(other.to_string())),
        }
    }
}

/// A word or punctuation token with its character offsets in the source text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub char_start: usize,
    pub char_end: usize,
}

/// One BIO (IOB2) tag. `O` carries no label by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BioTag {
    O,
    B(EntityLabel),
    I(EntityLabel),
}

impl BioTag {
    pub fn label(self) -> Option<EntityLabel> {
        match self {
            BioTag::O => None,
            BioTag::B(label) | BioTag::I(label) => Some(label),
        }
    }

    pub fn is_outside(self) -> bool {
        self == BioTag::O
    }
}

impl fmt::Display for BioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BioTag::O => f.write_str("O"),
            BioTag::B(label) => write!(f, "B-{label}"),
            BioTag::I(label) => write!(f, "I-{label}"),
        }
    }
}

impl FromStr for BioTag {
    type Err = AnnotationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "O" {
            return Ok(BioTag::O);
        }
        let bad = || AnnotationError::UnknownTag(s.to_string());
        let (prefix, label) = s.split_once('-').ok_or_else(bad)?;
        let label: EntityLabel = label.parse().map_err(|_| bad())?;
        match prefix {
            "B" => Ok(BioTag::B(label)),
            "I" => Ok(BioTag::I(label)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for BioTag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BioTag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-token tags aligned with a token sequence. May be ill-formed; see
/// [`validate_bio`] and [`repair_bio`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TagSequence(pub Vec<BioTag>);

impl TagSequence {
    pub fn new(tags: Vec<BioTag>) -> Self {
        TagSequence(tags)
    }

    pub fn outside(len: usize) -> Self {
        TagSequence(vec![BioTag::O; len])
    }

    pub fn is_well_formed(&self) -> bool {
        validate_bio(self).is_ok()
    }
}

impl std::ops::Deref for TagSequence {
    type Target = [BioTag];

    fn deref(&self) -> &[BioTag] {
        &self.0
    }
}

impl From<Vec<BioTag>> for TagSequence {
    fn from(tags: Vec<BioTag>) -> Self {
        TagSequence(tags)
    }
}

/// A labelled, half-open token range `[token_start, token_end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub label: EntityLabel,
    pub token_start: usize,
    pub token_end: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

impl EntitySpan {
    pub fn new(label: EntityLabel, token_start: usize, token_end: usize) -> Self {
        EntitySpan { label, token_start, token_end, confidence: None }
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = Some(confidence);
        self
    }

    pub fn len(&self) -> usize {
        self.token_end.saturating_sub(self.token_start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Label and range, ignoring confidence.
    pub fn key(&self) -> (EntityLabel, usize, usize) {
        (self.label, self.token_start, self.token_end)
    }

    pub fn overlaps(&self, other: &EntitySpan) -> bool {
        self.token_start < other.token_end && other.token_start < self.token_end
    }

    pub fn check_range(&self, token_count: usize) -> Result<(), AnnotationError> {
        if self.token_start < self.token_end && self.token_end <= token_count {
            Ok(())
        } else {
            Err(AnnotationError::SpanOutOfRange {
                start: self.token_start,
                end: self.token_end,
                token_count,
            })
        }
    }
}

/// Checks ranges and pairwise disjointness of `spans` over `token_count`
/// tokens. Order of `spans` does not matter.
pub fn validate_spans(spans: &[EntitySpan], token_count: usize) -> Result<(), AnnotationError> {
    for span in spans {
        span.check_range(token_count)?;
        if let Some(c) = span.confidence {
            if !(0.0..=1.0).contains(&c) {
                return Err(AnnotationError::InvalidConfidence(c));
            }
        }
    }
    let mut sorted: Vec<&EntitySpan> = spans.iter().collect();
    sorted.sort_by_key(|s| (s.token_start, s.token_end));
    for pair in sorted.windows(2) {
        if pair[0].overlaps(pair[1]) {
            return Err(AnnotationError::OverlappingSpans {
                first: (pair[0].token_start, pair[0].token_end),
                second: (pair[1].token_start, pair[1].token_end),
            });
        }
    }
    Ok(())
}

/// Makes predicted spans pairwise disjoint. The earlier-starting span wins,
/// ties go to the longer span, and remaining ties keep input order. Losers
/// are dropped. Output is sorted by `token_start`.
pub fn resolve_overlaps(spans: &[EntitySpan]) -> Vec<EntitySpan> {
    let mut ordered: Vec<EntitySpan> = spans.iter().filter(|s| !s.is_empty()).copied().collect();
    ordered.sort_by(|a, b| a.token_start.cmp(&b.token_start).then(b.len().cmp(&a.len())));
    let mut kept: Vec<EntitySpan> = Vec::with_capacity(ordered.len());
    for span in ordered {
        match kept.last() {
            Some(last) if span.token_start < last.token_end => {}
            _ => kept.push(span),
        }
    }
    kept
}

/// Slices `text` by character (not byte) offsets. Offsets past the end clamp.
pub fn char_slice(text: &str, char_start: usize, char_end: usize) -> &str {
    let byte_at = |n: usize| text.char_indices().nth(n).map_or(text.len(), |(b, _)| b);
    let start = byte_at(char_start);
    let end = if char_end <= char_start { start } else { byte_at(char_end) };
    &text[start..end]
}

/// Text covered by `span`, from its first token's start to its last token's
/// end, preserving the original spacing in between.
pub fn span_text<'a>(text: &'a str, tokens: &[Token], span: &EntitySpan) -> Result<&'a str, AnnotationError> {
    span.check_range(tokens.len())?;
    let first = &tokens[span.token_start];
    let last = &tokens[span.token_end - 1];
    Ok(char_slice(text, first.char_start, last.char_end))
}

/// A tutor response with its gold entity spans.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedResponse {
    id: String,
    text: String,
    tokens: Vec<Token>,
    gold_spans: Vec<EntitySpan>,
    meta: BTreeMap<String, String>,
}

impl AnnotatedResponse {
    /// Tokenizes `text` and validates `gold_spans` against the tokens. Gold
    /// spans must not carry a confidence; they are stored sorted by start.
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        mut gold_spans: Vec<EntitySpan>,
        meta: BTreeMap<String, String>,
    ) -> Result<Self, AnnotationError> {
        let id = id.into();
        let text = text.into();
        if id.is_empty() {
            return Err(AnnotationError::EmptyId);
        }
        if text.trim().is_empty() {
            return Err(AnnotationError::EmptyText);
        }
        let tokens = tokenize(&text);
        if gold_spans.iter().any(|s| s.confidence.is_some()) {
            return Err(AnnotationError::GoldConfidence);
        }
        validate_spans(&gold_spans, tokens.len())?;
        gold_spans.sort_by_key(|s| s.token_start);
        Ok(AnnotatedResponse { id, text, tokens, gold_spans, meta })
    }

    pub fn unannotated(id: impl Into<String>, text: impl Into<String>) -> Result<Self, AnnotationError> {
        Self::new(id, text, Vec::new(), BTreeMap::new())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn gold_spans(&self) -> &[EntitySpan] {
        &self.gold_spans
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn gold_tags(&self) -> TagSequence {
        spans_to_tags(&self.tokens, &self.gold_spans).expect("gold spans validated at construction")
    }

    pub fn span_text(&self, span: &EntitySpan) -> Result<&str, AnnotationError> {
        span_text(&self.text, &self.tokens, span)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnnotationError {
    #[error("unknown entity label `{0}`")]
    UnknownLabel(String),
    #[error("unknown BIO tag `{0}`")]
    UnknownTag(String),
    #[error("span [{start}, {end}) is empty or exceeds token count {token_count}")]
    SpanOutOfRange { start: usize, end: usize, token_count: usize },
    #[error("spans [{}, {}) and [{}, {}) overlap", first.0, first.1, second.0, second.1)]
    OverlappingSpans { first: (usize, usize), second: (usize, usize) },
    #[error("confidence {0} outside [0, 1]")]
    InvalidConfidence(f64),
    #[error("gold spans must not carry a confidence")]
    GoldConfidence,
    #[error("tag count {tags} does not match token count {tokens}")]
    LengthMismatch { tags: usize, tokens: usize },
    #[error("ill-formed tag sequence: {}", format_violations(.0))]
    IllFormedTags(Vec<Violation>),
    #[error("response text is empty")]
    EmptyText,
    #[error("response id is empty")]
    EmptyId,
}

fn format_violations(violations: &[Violation]) -> String {
    violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIXED: &str = "Good job! You got the right answer, and you stuck with it";

    #[test]
    fn tag_parse_and_display() {
        for s in ["O", "B-Effort", "I-Outcome", "B-Person"] {
            assert_eq!(s.parse::<BioTag>().unwrap().to_string(), s);
        }
        assert!("B-Foo".parse::<BioTag>().is_err());
        assert!("X-Effort".parse::<BioTag>().is_err());
        assert!("B".parse::<BioTag>().is_err());
    }

    #[test]
    fn person_is_experimental() {
        assert!(EntityLabel::Person.is_experimental());
        assert!(!EntityLabel::Effort.is_experimental());
    }

    #[test]
    fn span_text_mixed_effort() {
        let r = AnnotatedResponse::unannotated("f1", MIXED).unwrap();
        let stuck = r.tokens().iter().position(|t| t.text == "stuck").unwrap();
        let span = EntitySpan::new(EntityLabel::Effort, stuck, stuck + 3);
        assert_eq!(r.span_text(&span).unwrap(), "stuck with it");
        let good = EntitySpan::new(EntityLabel::Outcome, 0, 1);
        assert_eq!(r.span_text(&good).unwrap(), "Good");
    }

    #[test]
    fn span_text_keeps_apostrophes_and_spacing() {
        let text = "you're  already doing great so far.";
        let r = AnnotatedResponse::unannotated("a", text).unwrap();
        let span = EntitySpan::new(EntityLabel::Outcome, 0, 2);
        assert_eq!(r.span_text(&span).unwrap(), "you're  already");
    }

    #[test]
    fn span_text_out_of_range() {
        let r = AnnotatedResponse::unannotated("a", "Good job").unwrap();
        let span = EntitySpan::new(EntityLabel::Outcome, 1, 5);
        assert!(matches!(r.span_text(&span), Err(AnnotationError::SpanOutOfRange { .. })));
    }

    #[test]
    fn span_text_multibyte_offsets() {
        let text = "Très bien, you worked hard!";
        let tokens = tokenize(text);
        let span = EntitySpan::new(EntityLabel::Effort, 4, 6);
        assert_eq!(span_text(text, &tokens, &span).unwrap(), "worked hard");
        assert_eq!(tokens[0].text, "Très");
        assert_eq!((tokens[1].char_start, tokens[1].char_end), (5, 9));
    }

    #[test]
    fn response_rejects_bad_gold() {
        let overlap = vec![
            EntitySpan::new(EntityLabel::Effort, 0, 2),
            EntitySpan::new(EntityLabel::Outcome, 1, 3),
        ];
        let err = AnnotatedResponse::new("x", "a b c d", overlap, BTreeMap::new()).unwrap_err();
        assert!(matches!(err, AnnotationError::OverlappingSpans { .. }));
        let conf = vec![EntitySpan::new(EntityLabel::Effort, 0, 1).with_confidence(0.5)];
        assert_eq!(
            AnnotatedResponse::new("x", "a b", conf, BTreeMap::new()).unwrap_err(),
            AnnotationError::GoldConfidence
        );
        assert_eq!(AnnotatedResponse::unannotated("x", "  ").unwrap_err(), AnnotationError::EmptyText);
    }

    #[test]
    fn gold_spans_sorted_on_construction() {
        let spans = vec![
            EntitySpan::new(EntityLabel::Effort, 3, 4),
            EntitySpan::new(EntityLabel::Outcome, 0, 2),
        ];
        let r = AnnotatedResponse::new("x", "a b c d", spans, BTreeMap::new()).unwrap();
        assert_eq!(r.gold_spans()[0].token_start, 0);
    }

    #[test]
    fn resolve_overlaps_rules() {
        let e = |s, t| EntitySpan::new(EntityLabel::Effort, s, t);
        let o = |s, t| EntitySpan::new(EntityLabel::Outcome, s, t);
        // earlier start wins
        assert_eq!(resolve_overlaps(&[o(2, 5), e(1, 3)]), vec![e(1, 3)]);
        // same start: longer wins
        assert_eq!(resolve_overlaps(&[e(1, 2), o(1, 4), e(4, 5)]), vec![o(1, 4), e(4, 5)]);
        // full tie: first in input order
        assert_eq!(resolve_overlaps(&[o(0, 2), e(0, 2)]), vec![o(0, 2)]);
        assert!(resolve_overlaps(&[e(3, 3)]).is_empty());
    }

    #[test]
    fn char_slice_clamps() {
        assert_eq!(char_slice("héllo", 1, 3), "él");
        assert_eq!(char_slice("abc", 2, 10), "c");
        assert_eq!(char_slice("abc", 5, 10), "");
    }
}
