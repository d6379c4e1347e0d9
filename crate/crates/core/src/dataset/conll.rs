//! Two-column CoNLL text: one `token<TAB>tag` line per token, a
//! `-DOCSTART- <id>` line opening each response, and a blank line between
//! responses.
//!
//! Only token texts survive export. On import the text is rebuilt by joining
//! tokens with single spaces, so original spacing is lost; token texts,
//! spans and ids round-trip exactly.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{stem, Corpus, DatasetError};
use crate::annotation::{tags_to_spans, tokenize, validate_bio, AnnotatedResponse, AnnotationError, BioTag};

const DOCSTART: &str = "-DOCSTART-";

pub fn write_conll(corpus: &Corpus, mut writer: impl Write) -> std::io::Result<()> {
    for (i, r) in corpus.responses().iter().enumerate() {
        if i > 0 {
            writer.write_all(b"\n")?;
        }
        writeln!(writer, "{DOCSTART} {}", r.id())?;
        for (token, tag) in r.tokens().iter().zip(r.gold_tags().iter()) {
            writeln!(writer, "{}\t{}", token.text, tag)?;
        }
    }
    writer.flush()
}

pub fn export_conll(corpus: &Corpus, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| DatasetError::io(path, e))?;
    write_conll(corpus, BufWriter::new(file)).map_err(|e| DatasetError::io(path, e))
}

struct Block {
    id: Option<String>,
    tokens: Vec<String>,
    tags: Vec<BioTag>,
}

impl Block {
    fn new() -> Self {
        Block { id: None, tokens: Vec::new(), tags: Vec::new() }
    }

    fn is_empty(&self) -> bool {
        self.id.is_none() && self.tokens.is_empty()
    }

    fn finish(self, index: usize, name: &str) -> Result<AnnotatedResponse, DatasetError> {
        let id = self.id.unwrap_or_else(|| format!("{name}-{}", index + 1));
        validate_bio(&self.tags).map_err(|violations| DatasetError::IllFormedTags { id: id.clone(), violations })?;
        let text = self.tokens.join(" ");
        let tokens = tokenize(&text);
        let invariant = |source| DatasetError::Invariant { id: id.clone(), source };
        if tokens.len() != self.tokens.len() || tokens.iter().zip(&self.tokens).any(|(a, b)| a.text != *b) {
            return Err(invariant(AnnotationError::LengthMismatch { tags: self.tokens.len(), tokens: tokens.len() }));
        }
        let spans = tags_to_spans(&tokens, &self.tags).map_err(invariant)?;
        AnnotatedResponse::new(id.clone(), text, spans, BTreeMap::new()).map_err(invariant)
    }
}

pub fn read_conll(reader: impl BufRead, name: &str) -> Result<Corpus, DatasetError> {
    let mut responses = Vec::new();
    let mut block = Block::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| DatasetError::Parse { line: line_no, message: e.to_string() })?;
        if line.trim().is_empty() {
            if !block.is_empty() {
                let done = std::mem::replace(&mut block, Block::new());
                responses.push(done.finish(responses.len(), name)?);
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix(DOCSTART) {
            if !block.is_empty() {
                let done = std::mem::replace(&mut block, Block::new());
                responses.push(done.finish(responses.len(), name)?);
            }
            let id = rest.trim();
            if !id.is_empty() {
                block.id = Some(id.to_string());
            }
            continue;
        }
        let malformed = || DatasetError::MalformedLine { line: line_no, content: line.clone() };
        let (token, tag) = line.split_once('\t').ok_or_else(malformed)?;
        if token.is_empty() || tag.contains('\t') {
            return Err(malformed());
        }
        let tag: BioTag = tag.trim_end_matches('\r').parse().map_err(|_| malformed())?;
        block.tokens.push(token.to_string());
        block.tags.push(tag);
    }
    if !block.is_empty() {
        responses.push(block.finish(responses.len(), name)?);
    }
    Corpus::new(name, responses)
}

pub fn import_conll(path: impl AsRef<Path>) -> Result<Corpus, DatasetError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| DatasetError::io(path, e))?;
    read_conll(BufReader::new(file), &stem(path))
}
