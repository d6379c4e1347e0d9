//! Annotated corpora on disk: JSONL as the system of record, CoNLL-style
//! columns for interop, seeded splits, and tag distributions.

mod conll;
mod jsonl;
mod split;
mod stats;

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::annotation::{AnnotatedResponse, AnnotationError, Violation};

pub use conll::{export_conll, import_conll, read_conll, write_conll};
pub use jsonl::{
    load_jsonl, load_predictions, read_jsonl, read_predictions, save_jsonl, write_jsonl, write_predictions, ResponseRecord,
    SpanRecord,
};
pub use split::{split_dataset, split_sizes, SplitConfig, StratifyBy};
pub use stats::{compute_stats, TagDistribution, TAG_ORDER};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("response `{id}`: {source}")]
    Invariant { id: String, source: AnnotationError },
    #[error("duplicate response id `{0}`")]
    DuplicateId(String),
    #[error("line {line}: malformed CoNLL line `{content}`")]
    MalformedLine { line: usize, content: String },
    #[error("response `{id}`: ill-formed gold tags: {}", .violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    IllFormedTags { id: String, violations: Vec<Violation> },
    #[error("corpus has {0} responses; at least 3 are needed to split")]
    TooSmall(usize),
    #[error("invalid split ratios {0:?}: each must be > 0 and they must sum to 1")]
    InvalidRatios((f64, f64, f64)),
    #[error("corpus is empty")]
    Empty,
}

impl DatasetError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        DatasetError::Io { path: path.to_path_buf(), source }
    }
}

/// A named collection of responses with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    name: String,
    responses: Vec<AnnotatedResponse>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, responses: Vec<AnnotatedResponse>) -> Result<Self, DatasetError> {
        let mut seen = HashSet::with_capacity(responses.len());
        for r in &responses {
            if !seen.insert(r.id()) {
                return Err(DatasetError::DuplicateId(r.id().to_string()));
            }
        }
        Ok(Corpus { name: name.into(), responses })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn responses(&self) -> &[AnnotatedResponse] {
        &self.responses
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&AnnotatedResponse> {
        self.responses.iter().find(|r| r.id() == id)
    }

    pub fn into_responses(self) -> Vec<AnnotatedResponse> {
        self.responses
    }
}

pub(crate) fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "corpus".to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_ids_rejected() {
        let a = AnnotatedResponse::unannotated("x", "hi").unwrap();
        assert!(matches!(Corpus::new("c", vec![a.clone(), a]), Err(DatasetError::DuplicateId(_))));
    }
}
