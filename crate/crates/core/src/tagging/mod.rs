//! Producing predictions for raw responses and turning them into
//! response-level praise labels and a corrective verdict.

mod adapter;
mod lexicon;

use serde::{Deserialize, Serialize};

use crate::annotation::{validate_spans, AnnotationError, EntityLabel, EntitySpan};

pub use adapter::{
    sanitize_reply_spans, AdapterEndpoint, AdapterError, AdapterHandle, AdapterReply, AdapterRequest, HttpTransport,
    ReplySpan, StdioTransport, TcpTransport, Transport, DEFAULT_ADAPTER_TIMEOUT,
};
pub use lexicon::{lexicon_tag, Lexicon, LexiconEntry, LexiconError};

/// Tagger id recorded when the in-process lexicon ran by request.
pub const LEXICON_TAGGER_ID: &str = "lexicon";
/// Tagger id recorded when the lexicon ran because the adapter failed.
pub const FALLBACK_TAGGER_ID: &str = "lexicon-fallback";
/// Tagger id recorded for spans produced by an external adapter.
pub const EXTERNAL_TAGGER_ID: &str = "external";

/// A tagger's output for one response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub response_id: String,
    pub spans: Vec<EntitySpan>,
    pub tagger_id: String,
    /// Adapter round-trip time. In-process tagging reports 0.
    #[serde(default)]
    pub latency_ms: u64,
}

impl Prediction {
    /// Checks span ranges, disjointness and that every span has a confidence
    /// in `[0, 1]`.
    pub fn validate(&self, token_count: usize) -> Result<(), AnnotationError> {
        validate_spans(&self.spans, token_count)?;
        match self.spans.iter().find(|s| s.confidence.is_none()) {
            Some(_) => Err(AnnotationError::InvalidConfidence(f64::NAN)),
            None => Ok(()),
        }
    }
}

/// Which praise types a response contains.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PraiseLabels {
    pub effort: bool,
    pub outcome: bool,
    pub person: bool,
}

impl PraiseLabels {
    pub fn get(&self, label: EntityLabel) -> bool {
        match label {
            EntityLabel::Effort => self.effort,
            EntityLabel::Outcome => self.outcome,
            EntityLabel::Person => self.person,
        }
    }

    /// All eight combinations, `effort` varying slowest.
    pub fn all_combinations() -> impl Iterator<Item = PraiseLabels> {
        (0u8..8).map(|bits| PraiseLabels { effort: bits & 4 != 0, outcome: bits & 2 != 0, person: bits & 1 != 0 })
    }

    /// Short stable name, e.g. `effort+outcome` or `none`.
    pub fn combination_name(&self) -> String {
        let parts: Vec<&str> = EntityLabel::ALL
            .iter()
            .filter(|l| self.get(**l))
            .map(|l| match l {
                EntityLabel::Effort => "effort",
                EntityLabel::Outcome => "outcome",
                EntityLabel::Person => "person",
            })
            .collect();
        if parts.is_empty() {
            "none".to_string()
        } else {
            parts.join("+")
        }
    }
}

pub fn derive_labels(spans: &[EntitySpan]) -> PraiseLabels {
    let has = |label| spans.iter().any(|s| s.label == label);
    PraiseLabels { effort: has(EntityLabel::Effort), outcome: has(EntityLabel::Outcome), person: has(EntityLabel::Person) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Desired,
    Mixed,
    Undesired,
    NoPraise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RationaleCode {
    EffortOnly,
    EffortWithLessDesired,
    LessDesiredOnly,
    NoPraiseFound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CorrectiveDecision {
    pub verdict: Verdict,
    pub rationale_code: RationaleCode,
}

/// Effort praise is the desired kind; outcome and person praise are both
/// treated as less desired.
pub fn classify_correctness(labels: PraiseLabels) -> CorrectiveDecision {
    let less_desired = labels.outcome || labels.person;
    let (verdict, rationale_code) = match (labels.effort, less_desired) {
        (true, false) => (Verdict::Desired, RationaleCode::EffortOnly),
        (true, true) => (Verdict::Mixed, RationaleCode::EffortWithLessDesired),
        (false, true) => (Verdict::Undesired, RationaleCode::LessDesiredOnly),
        (false, false) => (Verdict::NoPraise, RationaleCode::NoPraiseFound),
    };
    CorrectiveDecision { verdict, rationale_code }
}
