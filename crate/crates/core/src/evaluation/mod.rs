//! Scoring predictions against gold annotations.
//!
//! Token-level scoring compares full BIO tags position by position. Span
//! scoring comes in two flavours: exact `(label, start, end)` matching and
//! IoU-thresholded partial matching. Responses are also bucketed into four
//! case categories, and response-level praise labels get binary
//! classification metrics. Repeated runs (e.g. several seeds) collapse into
//! mean and sample standard deviation.

mod aggregate;
mod classification;
mod report;
mod span;
mod token;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{AnnotationError, EntityLabel};

pub use aggregate::{aggregate_runs, RunAggregate};
pub use classification::{classification_metrics, BinaryConfusion, BinaryMetrics, ClassificationReport};
pub use report::{evaluate_predictions, evaluate_runs, CaseHistogram, EvalReport, ResponseCase, RunsReport};
pub use span::{categorize_case, partial_metrics, span_exact_metrics, span_iou, CaseCategory, DEFAULT_TAU};
pub use token::token_metrics;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold has {gold} items but prediction has {pred}")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("tau {0} outside (0, 1]")]
    InvalidTau(f64),
    #[error("empty input")]
    EmptyInput,
    #[error("response ids differ between gold and prediction: {0}")]
    IdMismatch(String),
    #[error("prediction for `{id}` is invalid: {source}")]
    InvalidPrediction { id: String, source: AnnotationError },
}

pub(crate) fn check_tau(tau: f64) -> Result<(), EvalError> {
    if tau > 0.0 && tau <= 1.0 {
        Ok(())
    } else {
        Err(EvalError::InvalidTau(tau))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Counts {
    pub fn add(&mut self, other: Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn is_zero(&self) -> bool {
        self.tp + self.fp + self.fn_ == 0
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// F1 as the harmonic mean, 0 when both inputs are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Scores {
    pub fn from_counts(c: Counts) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        Scores { precision, recall, f1: f1_score(precision, recall) }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold occurrences (`tp + fn`).
    pub support: u64,
    pub counts: Counts,
}

impl LabelMetrics {
    pub fn from_counts(counts: Counts) -> Self {
        let Scores { precision, recall, f1 } = Scores::from_counts(counts);
        LabelMetrics { precision, recall, f1, support: counts.tp + counts.fn_, counts }
    }
}

/// Precision/recall/F1 per label plus micro and macro averages.
///
/// `outside` is present only for token-level reports computed without
/// O-exclusion; in that case O also contributes to `micro` and `macro_avg`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub per_label: BTreeMap<EntityLabel, LabelMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outside: Option<LabelMetrics>,
    pub micro: Scores,
    #[serde(rename = "macro")]
    pub macro_avg: Scores,
    pub counts: Counts,
}

impl MetricReport {
    pub fn from_counts(per_label: &BTreeMap<EntityLabel, Counts>, outside: Option<Counts>) -> Self {
        let mut total = Counts::default();
        let mut active = Vec::new();
        let per_label: BTreeMap<EntityLabel, LabelMetrics> = EntityLabel::ALL
            .iter()
            .map(|&label| {
                let c = per_label.get(&label).copied().unwrap_or_default();
                total.add(c);
                let m = LabelMetrics::from_counts(c);
                if !c.is_zero() {
                    active.push(m);
                }
                (label, m)
            })
            .collect();
        let outside = outside.map(|c| {
            total.add(c);
            let m = LabelMetrics::from_counts(c);
            if !c.is_zero() {
                active.push(m);
            }
            m
        });
        let macro_avg = if active.is_empty() {
            Scores::default()
        } else {
            let n = active.len() as f64;
            let precision = active.iter().map(|m| m.precision).sum::<f64>() / n;
            let recall = active.iter().map(|m| m.recall).sum::<f64>() / n;
            Scores { precision, recall, f1: active.iter().map(|m| m.f1).sum::<f64>() / n }
        };
        MetricReport { per_label, outside, micro: Scores::from_counts(total), macro_avg, counts: total }
    }

    pub fn label(&self, label: EntityLabel) -> &LabelMetrics {
        &self.per_label[&label]
    }
}
