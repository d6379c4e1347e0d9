use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{f1_score, EvalError};
use crate::annotation::EntityLabel;
use crate::tagging::PraiseLabels;

/// Labels scored by [`classification_metrics`]. Person praise is left out.
pub const CLASSIFIED_LABELS: [EntityLabel; 2] = [EntityLabel::Effort, EntityLabel::Outcome];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryConfusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BinaryMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl BinaryMetrics {
    /// With no positive support and no positive predictions, precision,
    /// recall and F1 are all 0.
    pub fn from_confusion(c: BinaryConfusion) -> Self {
        let total = c.tp + c.fp + c.fn_ + c.tn;
        let div = |n: u64, d: u64| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        let precision = div(c.tp, c.tp + c.fp);
        let recall = div(c.tp, c.tp + c.fn_);
        BinaryMetrics { accuracy: div(c.tp + c.tn, total), precision, recall, f1: f1_score(precision, recall) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub per_label: BTreeMap<EntityLabel, BinaryMetrics>,
    pub confusion: BTreeMap<EntityLabel, BinaryConfusion>,
}

/// Per-label binary metrics over response-level praise labels.
pub fn classification_metrics(gold: &[PraiseLabels], pred: &[PraiseLabels]) -> Result<ClassificationReport, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::LengthMismatch { gold: gold.len(), pred: pred.len() });
    }
    if gold.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut per_label = BTreeMap::new();
    let mut confusion = BTreeMap::new();
    for label in CLASSIFIED_LABELS {
        let mut c = BinaryConfusion::default();
        for (g, p) in gold.iter().zip(pred) {
            match (g.get(label), p.get(label)) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        per_label.insert(label, BinaryMetrics::from_confusion(c));
        confusion.insert(label, c);
    }
    Ok(ClassificationReport { per_label, confusion })
}
