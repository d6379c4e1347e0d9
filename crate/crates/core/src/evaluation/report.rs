use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::token::token_counts;
use super::{
    aggregate_runs, categorize_case, check_tau, classification_metrics, CaseCategory, ClassificationReport, Counts,
    EvalError, MetricReport, RunAggregate,
};
use crate::annotation::{spans_to_tags, AnnotatedResponse, EntityLabel};
use crate::tagging::{derive_labels, Prediction};

/// Count of responses per case category; all four keys always present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CaseHistogram(pub BTreeMap<CaseCategory, usize>);

impl Default for CaseHistogram {
    fn default() -> Self {
        CaseHistogram(CaseCategory::ALL.iter().map(|&c| (c, 0)).collect())
    }
}

impl CaseHistogram {
    pub fn get(&self, category: CaseCategory) -> usize {
        self.0.get(&category).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseCase {
    pub id: String,
    pub category: CaseCategory,
}

/// Everything computed for one prediction set against one gold corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tau: f64,
    pub n_responses: usize,
    /// Token level, O excluded.
    pub token: MetricReport,
    pub exact: MetricReport,
    pub partial: MetricReport,
    pub cases: CaseHistogram,
    pub per_response: Vec<ResponseCase>,
    /// Absent for an empty corpus.
    pub classification: Option<ClassificationReport>,
}

/// Scores one prediction per gold response, matched by id. The id sets must
/// be identical.
pub fn evaluate_predictions(
    gold: &[AnnotatedResponse],
    predictions: &[Prediction],
    tau: f64,
) -> Result<EvalReport, EvalError> {
    check_tau(tau)?;
    let by_id = index_predictions(gold, predictions)?;

    let mut token_label: BTreeMap<EntityLabel, Counts> = BTreeMap::new();
    let mut exact_label: BTreeMap<EntityLabel, Counts> = BTreeMap::new();
    let mut partial_label: BTreeMap<EntityLabel, Counts> = BTreeMap::new();
    let mut cases = CaseHistogram::default();
    let mut per_response = Vec::with_capacity(gold.len());
    let mut gold_labels = Vec::with_capacity(gold.len());
    let mut pred_labels = Vec::with_capacity(gold.len());

    for response in gold {
        let pred = by_id[response.id()];
        let invalid = |source| EvalError::InvalidPrediction { id: response.id().to_string(), source };
        let pred_tags = spans_to_tags(response.tokens(), &pred.spans).map_err(invalid)?;
        let gold_spans = response.gold_spans();

        let (labels, _) = token_counts(&response.gold_tags(), &pred_tags);
        merge(&mut token_label, &labels);
        merge(&mut exact_label, &super::span_exact_metrics(gold_spans, &pred.spans).per_label_counts());
        merge(&mut partial_label, &super::partial_metrics(gold_spans, &pred.spans, tau)?.per_label_counts());

        let category = categorize_case(gold_spans, &pred.spans, tau)?;
        *cases.0.entry(category).or_default() += 1;
        per_response.push(ResponseCase { id: response.id().to_string(), category });
        gold_labels.push(derive_labels(gold_spans));
        pred_labels.push(derive_labels(&pred.spans));
    }

    let classification = if gold.is_empty() { None } else { Some(classification_metrics(&gold_labels, &pred_labels)?) };
    Ok(EvalReport {
        tau,
        n_responses: gold.len(),
        token: MetricReport::from_counts(&token_label, None),
        exact: MetricReport::from_counts(&exact_label, None),
        partial: MetricReport::from_counts(&partial_label, None),
        cases,
        per_response,
        classification,
    })
}

fn index_predictions<'a>(
    gold: &[AnnotatedResponse],
    predictions: &'a [Prediction],
) -> Result<HashMap<&'a str, &'a Prediction>, EvalError> {
    let mut by_id = HashMap::with_capacity(predictions.len());
    for p in predictions {
        if by_id.insert(p.response_id.as_str(), p).is_some() {
            return Err(EvalError::IdMismatch(format!("duplicate prediction for `{}`", p.response_id)));
        }
    }
    let gold_ids: HashSet<&str> = gold.iter().map(AnnotatedResponse::id).collect();
    if let Some(missing) = gold.iter().find(|r| !by_id.contains_key(r.id())) {
        return Err(EvalError::IdMismatch(format!("no prediction for `{}`", missing.id())));
    }
    if let Some(extra) = predictions.iter().find(|p| !gold_ids.contains(p.response_id.as_str())) {
        return Err(EvalError::IdMismatch(format!("prediction `{}` has no gold response", extra.response_id)));
    }
    Ok(by_id)
}

fn merge(into: &mut BTreeMap<EntityLabel, Counts>, from: &BTreeMap<EntityLabel, Counts>) {
    for (label, c) in from {
        into.entry(*label).or_default().add(*c);
    }
}

impl MetricReport {
    fn per_label_counts(&self) -> BTreeMap<EntityLabel, Counts> {
        self.per_label.iter().map(|(l, m)| (*l, m.counts)).collect()
    }
}

/// Several prediction sets against the same gold corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunsReport {
    pub runs: Vec<EvalReport>,
    pub aggregates: Vec<RunAggregate>,
}

type Metric = fn(&EvalReport) -> f64;

const AGGREGATED: &[(&str, Metric)] = &[
    ("token_micro_precision", |r| r.token.micro.precision),
    ("token_micro_recall", |r| r.token.micro.recall),
    ("token_micro_f1", |r| r.token.micro.f1),
    ("exact_micro_f1", |r| r.exact.micro.f1),
    ("partial_micro_f1", |r| r.partial.micro.f1),
    ("effort_accuracy", |r| classified(r, EntityLabel::Effort, |m| m.accuracy)),
    ("effort_f1", |r| classified(r, EntityLabel::Effort, |m| m.f1)),
    ("outcome_accuracy", |r| classified(r, EntityLabel::Outcome, |m| m.accuracy)),
    ("outcome_f1", |r| classified(r, EntityLabel::Outcome, |m| m.f1)),
];

fn classified(r: &EvalReport, label: EntityLabel, f: fn(&super::BinaryMetrics) -> f64) -> f64 {
    r.classification.as_ref().and_then(|c| c.per_label.get(&label)).map_or(0.0, f)
}

pub fn evaluate_runs(
    gold: &[AnnotatedResponse],
    runs: &[Vec<Prediction>],
    tau: f64,
) -> Result<RunsReport, EvalError> {
    if runs.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let reports = runs.iter().map(|p| evaluate_predictions(gold, p, tau)).collect::<Result<Vec<_>, _>>()?;
    let aggregates = AGGREGATED
        .iter()
        .map(|(name, get)| {
            let values: Vec<f64> = reports.iter().map(get).collect();
            aggregate_runs(&values, name)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RunsReport { runs: reports, aggregates })
}

fn metric_table(out: &mut String, title: &str, report: &MetricReport) {
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "  {:<10} {:>9} {:>9} {:>9} {:>8}", "label", "precision", "recall", "f1", "support");
    for (label, m) in report.per_label.iter().filter(|(_, m)| !m.counts.is_zero()) {
        let _ = writeln!(out, "  {:<10} {:>9.3} {:>9.3} {:>9.3} {:>8}", label.as_str(), m.precision, m.recall, m.f1, m.support);
    }
    if let Some(m) = &report.outside {
        let _ = writeln!(out, "  {:<10} {:>9.3} {:>9.3} {:>9.3} {:>8}", "O", m.precision, m.recall, m.f1, m.support);
    }
    let micro = &report.micro;
    let _ = writeln!(out, "  {:<10} {:>9.3} {:>9.3} {:>9.3} {:>8}", "micro", micro.precision, micro.recall, micro.f1, "");
    let mac = &report.macro_avg;
    let _ = writeln!(out, "  {:<10} {:>9.3} {:>9.3} {:>9.3} {:>8}", "macro", mac.precision, mac.recall, mac.f1, "");
}

impl EvalReport {
    /// Aligned-column plain text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "responses: {}", self.n_responses);
        metric_table(&mut out, "token-level (O excluded)", &self.token);
        metric_table(&mut out, "span exact match", &self.exact);
        metric_table(&mut out, &format!("span partial match (IoU >= {:.2})", self.tau), &self.partial);
        let _ = writeln!(out, "cases");
        for (category, n) in &self.cases.0 {
            let _ = writeln!(out, "  {:<18} {:>5}", format!("{category:?}"), n);
        }
        if let Some(c) = &self.classification {
            let _ = writeln!(out, "praise classification");
            let _ = writeln!(out, "  {:<10} {:>9} {:>9} {:>9} {:>9}", "label", "accuracy", "precision", "recall", "f1");
            for (label, m) in &c.per_label {
                let _ = writeln!(
                    out,
                    "  {:<10} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
                    label.as_str(),
                    m.accuracy,
                    m.precision,
                    m.recall,
                    m.f1
                );
            }
        }
        out
    }
}

impl RunsReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, run) in self.runs.iter().enumerate() {
            let _ = writeln!(out, "== run {}", i + 1);
            out.push_str(&run.to_text());
        }
        let n = self.runs.len();
        let _ = writeln!(out, "== mean ± std over {n} runs");
        for agg in &self.aggregates {
            let _ = writeln!(out, "  {:<22} {:.3} ± {:.3}", agg.metric_name, agg.mean, agg.std);
        }
        out
    }
}
