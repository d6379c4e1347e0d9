use std::fmt;

use super::{validate_spans, AnnotationError, BioTag, EntityLabel, EntitySpan, TagSequence, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// `I-X` at the start of the sequence or after `O`.
    IWithoutB,
    /// `I-X` after a `B-Y`/`I-Y` with `Y != X`.
    LabelMismatch { expected: EntityLabel, found: EntityLabel },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub index: usize,
    pub kind: ViolationKind,
}

impl Violation {
    pub fn reason(&self) -> &'static str {
        match self.kind {
            ViolationKind::IWithoutB => "I without preceding B",
            ViolationKind::LabelMismatch { .. } => "label mismatch with preceding tag",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "index {}: {}", self.index, self.reason())
    }
}

fn check(prev: Option<BioTag>, current: BioTag) -> Option<ViolationKind> {
    let BioTag::I(label) = current else {
        return None;
    };
    match prev.and_then(BioTag::label) {
        None => Some(ViolationKind::IWithoutB),
        Some(expected) if expected != label => Some(ViolationKind::LabelMismatch { expected, found: label }),
        Some(_) => None,
    }
}

/// Checks IOB2 well-formedness, reporting every offending index.
pub fn validate_bio(tags: &[BioTag]) -> Result<(), Vec<Violation>> {
    let violations: Vec<Violation> = tags
        .iter()
        .enumerate()
        .filter_map(|(index, &tag)| {
            let prev = index.checked_sub(1).map(|p| tags[p]);
            check(prev, tag).map(|kind| Violation { index, kind })
        })
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Turns every `I-X` without a valid predecessor into `B-X`.
pub fn repair_bio(tags: &[BioTag]) -> TagSequence {
    let mut out = tags.to_vec();
    for i in 0..tags.len() {
        let prev = i.checked_sub(1).map(|p| tags[p]);
        if let (Some(_), BioTag::I(label)) = (check(prev, tags[i]), tags[i]) {
            out[i] = BioTag::B(label);
        }
    }
    TagSequence(out)
}

pub fn spans_to_tags(tokens: &[Token], spans: &[EntitySpan]) -> Result<TagSequence, AnnotationError> {
    validate_spans(spans, tokens.len())?;
    let mut tags = vec![BioTag::O; tokens.len()];
    for span in spans {
        tags[span.token_start] = BioTag::B(span.label);
        for tag in &mut tags[span.token_start + 1..span.token_end] {
            *tag = BioTag::I(span.label);
        }
    }
    Ok(TagSequence(tags))
}

/// Decodes well-formed tags into spans in token order. Run [`repair_bio`]
/// first on untrusted input.
pub fn tags_to_spans(tokens: &[Token], tags: &[BioTag]) -> Result<Vec<EntitySpan>, AnnotationError> {
    if tags.len() != tokens.len() {
        return Err(AnnotationError::LengthMismatch { tags: tags.len(), tokens: tokens.len() });
    }
    validate_bio(tags).map_err(AnnotationError::IllFormedTags)?;
    let mut spans = Vec::new();
    let mut open: Option<EntitySpan> = None;
    for (i, tag) in tags.iter().enumerate() {
        match tag {
            BioTag::I(_) => {
                if let Some(span) = open.as_mut() {
                    span.token_end = i + 1;
                }
            }
            BioTag::B(label) => {
                spans.extend(open.take());
                open = Some(EntitySpan::new(*label, i, i + 1));
            }
            BioTag::O => spans.extend(open.take()),
        }
    }
    spans.extend(open);
    Ok(spans)
}
