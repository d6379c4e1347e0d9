use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{check_tau, Counts, EvalError, MetricReport};
use crate::annotation::{EntityLabel, EntitySpan};

/// Default IoU threshold for partial credit and case categorization.
pub const DEFAULT_TAU: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CaseCategory {
    Accurate,
    Inaccurate,
    PartiallyAccurate,
    /// Neither gold nor prediction has any entity.
    AccurateNone,
}

impl CaseCategory {
    pub const ALL: [CaseCategory; 4] =
        [CaseCategory::Accurate, CaseCategory::Inaccurate, CaseCategory::PartiallyAccurate, CaseCategory::AccurateNone];
}

/// Token-set intersection over union; 0 across different labels.
pub fn span_iou(a: &EntitySpan, b: &EntitySpan) -> f64 {
    if a.label != b.label {
        return 0.0;
    }
    let inter = a.token_end.min(b.token_end).saturating_sub(a.token_start.max(b.token_start));
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

fn report(gold: &[EntitySpan], pred: &[EntitySpan], matched: &[(usize, usize)]) -> MetricReport {
    let mut counts: BTreeMap<EntityLabel, Counts> = BTreeMap::new();
    for &(g, _) in matched {
        counts.entry(gold[g].label).or_default().tp += 1;
    }
    let mut gold_hit = vec![false; gold.len()];
    let mut pred_hit = vec![false; pred.len()];
    for &(g, p) in matched {
        gold_hit[g] = true;
        pred_hit[p] = true;
    }
    for (span, _) in pred.iter().zip(&pred_hit).filter(|(_, hit)| !**hit) {
        counts.entry(span.label).or_default().fp += 1;
    }
    for (span, _) in gold.iter().zip(&gold_hit).filter(|(_, hit)| !**hit) {
        counts.entry(span.label).or_default().fn_ += 1;
    }
    MetricReport::from_counts(&counts, None)
}

fn exact_matches(gold: &[EntitySpan], pred: &[EntitySpan]) -> Vec<(usize, usize)> {
    let mut used = vec![false; gold.len()];
    let mut matched = Vec::new();
    for (p, ps) in pred.iter().enumerate() {
        if let Some(g) = (0..gold.len()).find(|&g| !used[g] && gold[g].key() == ps.key()) {
            used[g] = true;
            matched.push((g, p));
        }
    }
    matched
}

/// One-to-one matching on identical `(label, start, end)`.
pub fn span_exact_metrics(gold: &[EntitySpan], pred: &[EntitySpan]) -> MetricReport {
    report(gold, pred, &exact_matches(gold, pred))
}

/// Greedy one-to-one matching in descending IoU order; a pair is eligible
/// when labels agree and IoU ≥ `tau`. Ties fall to the lower gold index, then
/// the lower prediction index.
pub(crate) fn partial_matches(gold: &[EntitySpan], pred: &[EntitySpan], tau: f64) -> Vec<(usize, usize)> {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (g, gs) in gold.iter().enumerate() {
        for (p, ps) in pred.iter().enumerate() {
            let iou = span_iou(gs, ps);
            if gs.label == ps.label && iou >= tau {
                candidates.push((iou, g, p));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut gold_used = vec![false; gold.len()];
    let mut pred_used = vec![false; pred.len()];
    let mut matched = Vec::new();
    for (_, g, p) in candidates {
        if !gold_used[g] && !pred_used[p] {
            gold_used[g] = true;
            pred_used[p] = true;
            matched.push((g, p));
        }
    }
    matched
}

pub fn partial_metrics(gold: &[EntitySpan], pred: &[EntitySpan], tau: f64) -> Result<MetricReport, EvalError> {
    check_tau(tau)?;
    Ok(report(gold, pred, &partial_matches(gold, pred, tau)))
}

pub fn categorize_case(gold: &[EntitySpan], pred: &[EntitySpan], tau: f64) -> Result<CaseCategory, EvalError> {
    check_tau(tau)?;
    if gold.is_empty() && pred.is_empty() {
        return Ok(CaseCategory::AccurateNone);
    }
    let mut g: Vec<_> = gold.iter().map(EntitySpan::key).collect();
    let mut p: Vec<_> = pred.iter().map(EntitySpan::key).collect();
    g.sort();
    p.sort();
    if g == p {
        return Ok(CaseCategory::Accurate);
    }
    if partial_matches(gold, pred, tau).is_empty() {
        Ok(CaseCategory::Inaccurate)
    } else {
        Ok(CaseCategory::PartiallyAccurate)
    }
}
