use std::collections::BTreeMap;

use super::{Counts, EvalError, MetricReport};
use crate::annotation::{BioTag, EntityLabel};

/// Position-by-position comparison of full BIO tags.
///
/// A position counts as a true positive for its label only when both tags
/// are identical, so `B-X` against `I-X` is one false positive and one false
/// negative for `X`. With `exclude_outside`, O is not scored at all: correct
/// O predictions earn nothing, while an entity tag predicted over gold O is
/// still a false positive for that entity.
pub fn token_metrics(gold: &[BioTag], pred: &[BioTag], exclude_outside: bool) -> Result<MetricReport, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::LengthMismatch { gold: gold.len(), pred: pred.len() });
    }
    let (per_label, outside) = token_counts(gold, pred);
    Ok(MetricReport::from_counts(&per_label, (!exclude_outside).then_some(outside)))
}

pub(crate) fn token_counts(gold: &[BioTag], pred: &[BioTag]) -> (BTreeMap<EntityLabel, Counts>, Counts) {
    let mut per_label: BTreeMap<EntityLabel, Counts> = BTreeMap::new();
    let mut outside = Counts::default();
    for (&g, &p) in gold.iter().zip(pred) {
        if g == p {
            bump(&mut per_label, &mut outside, g.label(), |c| c.tp += 1);
        } else {
            bump(&mut per_label, &mut outside, p.label(), |c| c.fp += 1);
            bump(&mut per_label, &mut outside, g.label(), |c| c.fn_ += 1);
        }
    }
    (per_label, outside)
}

fn bump(
    per_label: &mut BTreeMap<EntityLabel, Counts>,
    outside: &mut Counts,
    label: Option<EntityLabel>,
    f: impl FnOnce(&mut Counts),
) {
    match label {
        Some(l) => f(per_label.entry(l).or_default()),
        None => f(outside),
    }
}
