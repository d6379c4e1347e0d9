use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{stem, Corpus, DatasetError};
use crate::annotation::{AnnotatedResponse, EntityLabel, EntitySpan};
use crate::tagging::Prediction;

/// One JSONL line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub spans: Vec<SpanRecord>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpanRecord {
    pub label: EntityLabel,
    pub token_start: usize,
    pub token_end: usize,
}

impl From<&AnnotatedResponse> for ResponseRecord {
    fn from(r: &AnnotatedResponse) -> Self {
        ResponseRecord {
            id: r.id().to_string(),
            text: r.text().to_string(),
            spans: r
                .gold_spans()
                .iter()
                .map(|s| SpanRecord { label: s.label, token_start: s.token_start, token_end: s.token_end })
                .collect(),
            meta: r.meta().clone(),
        }
    }
}

impl TryFrom<ResponseRecord> for AnnotatedResponse {
    type Error = DatasetError;

    fn try_from(rec: ResponseRecord) -> Result<Self, DatasetError> {
        let spans = rec.spans.iter().map(|s| EntitySpan::new(s.label, s.token_start, s.token_end)).collect();
        let id = rec.id.clone();
        AnnotatedResponse::new(rec.id, rec.text, spans, rec.meta).map_err(|source| DatasetError::Invariant { id, source })
    }
}

/// Parses JSONL from `reader`, validating every response. Blank lines are
/// skipped; line numbers in errors are 1-based.
pub fn read_jsonl(reader: impl BufRead, name: &str) -> Result<Corpus, DatasetError> {
    let mut responses = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| DatasetError::Parse { line: i + 1, message: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ResponseRecord =
            serde_json::from_str(&line).map_err(|e| DatasetError::Parse { line: i + 1, message: e.to_string() })?;
        responses.push(AnnotatedResponse::try_from(rec)?);
    }
    Corpus::new(name, responses)
}

pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Corpus, DatasetError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| DatasetError::io(path, e))?;
    read_jsonl(BufReader::new(file), &stem(path))
}

pub fn write_jsonl(corpus: &Corpus, mut writer: impl Write) -> std::io::Result<()> {
    for r in corpus.responses() {
        let line = serde_json::to_string(&ResponseRecord::from(r)).expect("record serializes");
        writer.write_all(line.as_bytes())?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn save_jsonl(corpus: &Corpus, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| DatasetError::io(path, e))?;
    write_jsonl(corpus, BufWriter::new(file)).map_err(|e| DatasetError::io(path, e))
}

/// Reads one [`Prediction`] per line. Span ranges are only checked once the
/// predictions meet their gold responses.
pub fn read_predictions(reader: impl BufRead) -> Result<Vec<Prediction>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| DatasetError::Parse { line: i + 1, message: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| DatasetError::Parse { line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<Prediction>, DatasetError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| DatasetError::io(path, e))?;
    read_predictions(BufReader::new(file))
}

pub fn write_predictions(predictions: &[Prediction], mut writer: impl Write) -> std::io::Result<()> {
    for p in predictions {
        let line = serde_json::to_string(p).expect("prediction serializes");
        writer.write_all(line.as_bytes())?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::AnnotationError;

    #[test]
    fn reads_documented_line() {
        let line = r#"{"id":"r1","text":"Great job!","spans":[{"label":"Outcome","token_start":0,"token_end":2}]}"#;
        let c = read_jsonl(line.as_bytes(), "c").unwrap();
        let r = &c.responses()[0];
        assert_eq!(r.gold_spans(), [EntitySpan::new(EntityLabel::Outcome, 0, 2)]);
        assert_eq!(r.span_text(&r.gold_spans()[0]).unwrap(), "Great job");
    }

    #[test]
    fn out_of_range_span_names_response() {
        let line = r#"{"id":"r1","text":"Great job!","spans":[{"label":"Outcome","token_start":0,"token_end":99}]}"#;
        match read_jsonl(line.as_bytes(), "c") {
            Err(DatasetError::Invariant { id, source: AnnotationError::SpanOutOfRange { .. } }) => assert_eq!(id, "r1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_error_has_line_number() {
        let input = "{\"id\":\"a\",\"text\":\"hi\"}\n\n{not json}\n";
        assert!(matches!(read_jsonl(input.as_bytes(), "c"), Err(DatasetError::Parse { line: 3, .. })));
    }

    #[test]
    fn canonical_write() {
        let input = r#"{"text":"Great job!","meta":{"scenario":"s1","lesson":"praise"},"id":"r1","spans":[{"token_end":2,"token_start":0,"label":"Outcome"}]}"#;
        let c = read_jsonl(input.as_bytes(), "c").unwrap();
        let mut out = Vec::new();
        write_jsonl(&c, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "{\"id\":\"r1\",\"text\":\"Great job!\",\"spans\":[{\"label\":\"Outcome\",\"token_start\":0,\"token_end\":2}],\"meta\":{\"lesson\":\"praise\",\"scenario\":\"s1\"}}\n"
        );
    }

    #[test]
    fn predictions_round_trip() {
        let p = Prediction {
            response_id: "r1".into(),
            spans: vec![EntitySpan::new(EntityLabel::Effort, 0, 2).with_confidence(0.9)],
            tagger_id: "lexicon".into(),
            latency_ms: 0,
        };
        let mut out = Vec::new();
        write_predictions(std::slice::from_ref(&p), &mut out).unwrap();
        assert_eq!(read_predictions(out.as_slice()).unwrap(), [p]);
    }

    #[test]
    fn missing_file() {
        assert!(matches!(load_jsonl("/nonexistent/x.jsonl"), Err(DatasetError::Io { .. })));
    }
}
