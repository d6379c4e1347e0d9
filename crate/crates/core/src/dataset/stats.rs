use std::fmt::Write as _;

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use super::{Corpus, DatasetError};
use crate::annotation::{BioTag, EntityLabel};

/// Column order used for counts, JSON maps and text tables.
pub const TAG_ORDER: [&str; 7] = ["O", "B-Outcome", "I-Outcome", "B-Effort", "I-Effort", "B-Person", "I-Person"];

fn slot(tag: &BioTag) -> usize {
    let label_slot = |label: &EntityLabel| match label {
        EntityLabel::Outcome => 1,
        EntityLabel::Effort => 3,
        EntityLabel::Person => 5,
    };
    match tag {
        BioTag::O => 0,
        BioTag::B(l) => label_slot(l),
        BioTag::I(l) => label_slot(l) + 1,
    }
}

/// Gold tag counts over a corpus.
///
/// `percentages` are rounded to one decimal, so their sum can drift from 100
/// by up to 0.1; `exact_percentages` keep full precision.
#[derive(Debug, Clone, PartialEq)]
pub struct TagDistribution {
    counts: [usize; 7],
    total: usize,
}

impl TagDistribution {
    pub fn from_counts(counts: [usize; 7]) -> Result<Self, DatasetError> {
        let total = counts.iter().sum();
        if total == 0 {
            return Err(DatasetError::Empty);
        }
        Ok(TagDistribution { counts, total })
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn count(&self, tag: &str) -> Option<usize> {
        TAG_ORDER.iter().position(|t| *t == tag).map(|i| self.counts[i])
    }

    pub fn exact_percentage(&self, tag: &str) -> Option<f64> {
        self.count(tag).map(|c| 100.0 * c as f64 / self.total as f64)
    }

    pub fn percentage(&self, tag: &str) -> Option<f64> {
        self.exact_percentage(tag).map(|p| (p * 10.0).round() / 10.0)
    }

    pub fn counts(&self) -> impl Iterator<Item = (&'static str, usize)> + '_ {
        TAG_ORDER.iter().copied().zip(self.counts.iter().copied())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<10} {:>8} {:>7}", "tag", "count", "%");
        for (tag, count) in self.counts() {
            let _ = writeln!(out, "{:<10} {:>8} {:>7.1}", tag, count, self.percentage(tag).unwrap_or(0.0));
        }
        let _ = writeln!(out, "{:<10} {:>8}", "total", self.total);
        out
    }
}

struct OrderedMap<'a, F>(&'a TagDistribution, F);

impl<F: Fn(&TagDistribution, &str) -> f64> Serialize for OrderedMap<'_, F> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(TAG_ORDER.len()))?;
        for tag in TAG_ORDER {
            map.serialize_entry(tag, &(self.1)(self.0, tag))?;
        }
        map.end()
    }
}

struct Counts<'a>(&'a TagDistribution);

impl Serialize for Counts<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(TAG_ORDER.len()))?;
        for (tag, count) in self.0.counts() {
            map.serialize_entry(tag, &count)?;
        }
        map.end()
    }
}

impl Serialize for TagDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("TagDistribution", 4)?;
        st.serialize_field("counts", &Counts(self))?;
        st.serialize_field("percentages", &OrderedMap(self, |d: &TagDistribution, t: &str| d.percentage(t).unwrap_or(0.0)))?;
        st.serialize_field(
            "exact_percentages",
            &OrderedMap(self, |d: &TagDistribution, t: &str| d.exact_percentage(t).unwrap_or(0.0)),
        )?;
        st.serialize_field("total", &self.total)?;
        st.end()
    }
}

pub fn compute_stats(corpus: &Corpus) -> Result<TagDistribution, DatasetError> {
    if corpus.is_empty() {
        return Err(DatasetError::Empty);
    }
    let mut counts = [0usize; 7];
    for r in corpus.responses() {
        for tag in r.gold_tags().iter() {
            counts[slot(tag)] += 1;
        }
    }
    TagDistribution::from_counts(counts)
}
