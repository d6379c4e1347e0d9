//! Explanatory feedback rendered from predicted praise spans.
//!
//! Each span picks a template by label and confidence, and the span's exact
//! source text is substituted for the `{quote}` placeholder. A response with
//! no spans gets a single no-praise message.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{span_text, validate_spans, AnnotationError, EntityLabel, EntitySpan, Token};
use crate::tagging::{classify_correctness, derive_labels, CorrectiveDecision, Prediction};

pub const QUOTE_PLACEHOLDER: &str = "{quote}";
pub const DEFAULT_CONFIDENCE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TemplateId {
    EffortPraise,
    OutcomeRedirect,
    PersonRedirect,
    EffortHedged,
    OutcomeHedged,
    NoPraise,
}

impl TemplateId {
    pub const ALL: [TemplateId; 6] = [
        TemplateId::EffortPraise,
        TemplateId::OutcomeRedirect,
        TemplateId::PersonRedirect,
        TemplateId::EffortHedged,
        TemplateId::OutcomeHedged,
        TemplateId::NoPraise,
    ];

    pub fn is_hedged(self) -> bool {
        matches!(self, TemplateId::EffortHedged | TemplateId::OutcomeHedged)
    }

    /// Templates whose wording invites the tutor to answer again.
    pub fn asks_for_retry(self) -> bool {
        matches!(self, TemplateId::OutcomeRedirect | TemplateId::PersonRedirect | TemplateId::NoPraise)
    }

    pub fn default_text(self) -> &'static str {
        match self {
            TemplateId::EffortPraise => {
                "Saying \"{quote}\" is a nice example of process-focused praise, which praises students for their effort."
            }
            TemplateId::OutcomeRedirect => {
                "Saying \"{quote}\" is praising students for the outcome. You should focus on praising the students for their effort and process towards learning. Do you want to try responding again?"
            }
            TemplateId::PersonRedirect => {
                "Saying \"{quote}\" is praising students for who they are rather than what they did. You should focus on praising the students for their effort and process towards learning. Do you want to try responding again?"
            }
            TemplateId::EffortHedged => {
                "Saying \"{quote}\" might be an example of praising effort. Do you want to explain your reasoning?"
            }
            TemplateId::OutcomeHedged => {
                "Saying \"{quote}\" might be an example of praising the outcome. Do you want to explain your reasoning?"
            }
            TemplateId::NoPraise => {
                "This response doesn't yet include praise. Try praising the student's effort \u{2014} for example, how they kept working through the problem. Do you want to try responding again?"
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum FeedbackError {
    #[error("span has no confidence")]
    MissingConfidence,
    #[error("no template configured for {0:?}")]
    TemplateMissing(TemplateId),
    #[error("template {0:?} lacks the {{quote}} placeholder")]
    MissingPlaceholder(TemplateId),
    #[error("confidence threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
    #[error(transparent)]
    Span(#[from] AnnotationError),
    #[error("reading templates: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing templates: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackConfig {
    pub confidence_threshold: f64,
    pub templates: BTreeMap<TemplateId, String>,
    pub allow_retry_prompt: bool,
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        FeedbackConfig {
            confidence_threshold: DEFAULT_CONFIDENCE_THRESHOLD,
            templates: TemplateId::ALL.iter().map(|&id| (id, id.default_text().to_string())).collect(),
            allow_retry_prompt: true,
        }
    }
}

impl FeedbackConfig {
    pub fn validate(&self) -> Result<(), FeedbackError> {
        if !(0.0..=1.0).contains(&self.confidence_threshold) {
            return Err(FeedbackError::InvalidThreshold(self.confidence_threshold));
        }
        for id in TemplateId::ALL {
            let text = self.templates.get(&id).ok_or(FeedbackError::TemplateMissing(id))?;
            if id != TemplateId::NoPraise && !text.contains(QUOTE_PLACEHOLDER) {
                return Err(FeedbackError::MissingPlaceholder(id));
            }
        }
        Ok(())
    }

    /// Reads a JSON object mapping every template id to its text.
    pub fn load_templates(path: impl AsRef<Path>) -> Result<BTreeMap<TemplateId, String>, FeedbackError> {
        let templates: BTreeMap<TemplateId, String> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let config = FeedbackConfig { templates, ..Default::default() };
        config.validate()?;
        Ok(config.templates)
    }

    fn template(&self, id: TemplateId) -> Result<&str, FeedbackError> {
        self.templates.get(&id).map(String::as_str).ok_or(FeedbackError::TemplateMissing(id))
    }
}

/// Picks the template for one predicted span. Returns `None` for a
/// below-threshold Person span, which is dropped from feedback.
pub fn select_template(span: &EntitySpan, config: &FeedbackConfig) -> Result<Option<TemplateId>, FeedbackError> {
    let confidence = span.confidence.ok_or(FeedbackError::MissingConfidence)?;
    let confident = confidence >= config.confidence_threshold;
    Ok(match (span.label, confident) {
        (EntityLabel::Effort, true) => Some(TemplateId::EffortPraise),
        (EntityLabel::Effort, false) => Some(TemplateId::EffortHedged),
        (EntityLabel::Outcome, true) => Some(TemplateId::OutcomeRedirect),
        (EntityLabel::Outcome, false) => Some(TemplateId::OutcomeHedged),
        (EntityLabel::Person, true) => Some(TemplateId::PersonRedirect),
        (EntityLabel::Person, false) => None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quote {
    pub text: String,
    pub char_start: usize,
    pub char_end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackItem {
    /// Absent for the no-praise item.
    pub span: Option<EntitySpan>,
    pub quote: Option<Quote>,
    pub template_id: TemplateId,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackMessage {
    pub items: Vec<FeedbackItem>,
    pub overall_verdict: CorrectiveDecision,
    /// Some item asks the tutor to respond again, and retries are allowed.
    pub retry_prompt: bool,
    /// Some item is hedged and asks the tutor to explain.
    pub explain_prompt: bool,
}

pub fn render_feedback(
    text: &str,
    tokens: &[Token],
    prediction: &Prediction,
    config: &FeedbackConfig,
) -> Result<FeedbackMessage, FeedbackError> {
    validate_spans(&prediction.spans, tokens.len())?;
    let mut spans = prediction.spans.clone();
    spans.sort_by_key(|s| s.token_start);

    let mut items = Vec::with_capacity(spans.len().max(1));
    let mut kept = Vec::with_capacity(spans.len());
    for span in spans {
        let Some(template_id) = select_template(&span, config)? else {
            continue;
        };
        let quoted = span_text(text, tokens, &span)?;
        items.push(FeedbackItem {
            span: Some(span),
            quote: Some(Quote {
                text: quoted.to_string(),
                char_start: tokens[span.token_start].char_start,
                char_end: tokens[span.token_end - 1].char_end,
            }),
            template_id,
            text: config.template(template_id)?.replace(QUOTE_PLACEHOLDER, quoted),
        });
        kept.push(span);
    }
    if items.is_empty() {
        items.push(FeedbackItem {
            span: None,
            quote: None,
            template_id: TemplateId::NoPraise,
            text: config.template(TemplateId::NoPraise)?.to_string(),
        });
    }
    let retry_prompt = config.allow_retry_prompt && items.iter().any(|i| i.template_id.asks_for_retry());
    let explain_prompt = items.iter().any(|i| i.template_id.is_hedged());
    Ok(FeedbackMessage {
        items,
        overall_verdict: classify_correctness(derive_labels(&kept)),
        retry_prompt,
        explain_prompt,
    })
}
