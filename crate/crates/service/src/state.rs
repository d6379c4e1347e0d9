use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use praisetag_core::dataset::{load_jsonl, Corpus, DatasetError};
use praisetag_core::feedback::FeedbackConfig;
use praisetag_core::tagging::{lexicon_tag, AdapterHandle, LexiconError, FALLBACK_TAGGER_ID};
use praisetag_core::{AdapterEndpoint, AdapterError, FeedbackError, Lexicon, Prediction};
use thiserror::Error;
use tokio::sync::Semaphore;

use crate::config::{ConfigError, ServiceConfig, TaggerMode};

#[derive(Debug, Error)]
pub enum StartupError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("lexicon: {0}")]
    Lexicon(#[from] LexiconError),
    #[error("feedback templates: {0}")]
    Feedback(#[from] FeedbackError),
    #[error("corpus: {0}")]
    Corpus(#[from] DatasetError),
    #[error("reading corpus directory {0}: {1}")]
    CorpusDir(String, std::io::Error),
}

/// Reusable adapter connections. At most `size` requests talk to the
/// adapter at once; a handle that errored is dropped rather than reused.
pub struct AdapterPool {
    endpoint: AdapterEndpoint,
    timeout: Duration,
    idle: Mutex<Vec<AdapterHandle>>,
    permits: Arc<Semaphore>,
}

impl AdapterPool {
    pub fn new(endpoint: AdapterEndpoint, timeout: Duration, size: usize) -> Self {
        AdapterPool { endpoint, timeout, idle: Mutex::new(Vec::new()), permits: Arc::new(Semaphore::new(size.max(1))) }
    }

    pub async fn tag(self: &Arc<Self>, id: String, text: String) -> Result<Prediction, AdapterError> {
        let permit = self.permits.clone().acquire_owned().await.expect("pool semaphore is never closed");
        let pool = Arc::clone(self);
        tokio::task::spawn_blocking(move || {
            let _permit = permit;
            pool.tag_blocking(&id, &text)
        })
        .await
        .unwrap_or_else(|e| Err(AdapterError::Transport(format!("adapter task failed: {e}"))))
    }

    fn tag_blocking(&self, id: &str, text: &str) -> Result<Prediction, AdapterError> {
        let idle = self.idle.lock().unwrap_or_else(|e| e.into_inner()).pop();
        let mut handle = match idle {
            Some(h) => h,
            None => self.endpoint.connect(self.timeout)?,
        };
        let result = handle.external_tag(id, text);
        if result.is_ok() {
            self.idle.lock().unwrap_or_else(|e| e.into_inner()).push(handle);
        }
        result
    }
}

#[derive(Clone)]
pub enum Tagger {
    Lexicon,
    External(Arc<AdapterPool>),
    /// External first; any adapter failure degrades to the lexicon.
    ExternalWithFallback(Arc<AdapterPool>),
}

/// Everything handlers share. Immutable after startup.
#[derive(Clone)]
pub struct AppState {
    pub tagger: Tagger,
    pub lexicon: Arc<Lexicon>,
    pub feedback: Arc<FeedbackConfig>,
    pub corpora: Arc<BTreeMap<String, Corpus>>,
}

impl AppState {
    pub fn new(tagger: Tagger, lexicon: Lexicon, feedback: FeedbackConfig, corpora: Vec<Corpus>) -> Self {
        AppState {
            tagger,
            lexicon: Arc::new(lexicon),
            feedback: Arc::new(feedback),
            corpora: Arc::new(corpora.into_iter().map(|c| (c.name().to_string(), c)).collect()),
        }
    }

    /// Default lexicon and templates, no adapter, no corpora.
    pub fn lexicon_only() -> Self {
        AppState::new(Tagger::Lexicon, Lexicon::default_praise(), FeedbackConfig::default(), Vec::new())
    }

    pub fn from_config(config: &ServiceConfig) -> Result<Self, StartupError> {
        config.validate()?;
        let lexicon = match &config.lexicon {
            Some(path) => Lexicon::load(path)?,
            None => Lexicon::default_praise(),
        };
        let mut feedback = FeedbackConfig {
            confidence_threshold: config.feedback.confidence_threshold,
            allow_retry_prompt: config.feedback.allow_retry_prompt,
            ..FeedbackConfig::default()
        };
        if let Some(path) = &config.feedback.templates {
            feedback.templates = FeedbackConfig::load_templates(path)?;
        }
        feedback.validate()?;
        let corpora = match &config.corpus_dir {
            Some(dir) => load_corpus_dir(dir)?,
            None => Vec::new(),
        };
        let tagger = match (config.tagger, config.adapter_endpoint()?) {
            (TaggerMode::Lexicon, _) | (_, None) => Tagger::Lexicon,
            (mode, Some(endpoint)) => {
                let pool = Arc::new(AdapterPool::new(endpoint, config.request_timeout(), config.adapter_pool_size));
                if mode == TaggerMode::External {
                    Tagger::External(pool)
                } else {
                    Tagger::ExternalWithFallback(pool)
                }
            }
        };
        Ok(AppState::new(tagger, lexicon, feedback, corpora))
    }

    /// Runs the configured tagger. Errors only come from an external tagger
    /// without fallback.
    pub async fn tag(&self, id: &str, text: &str) -> Result<Prediction, AdapterError> {
        match &self.tagger {
            Tagger::Lexicon => Ok(lexicon_tag(id, text, &self.lexicon)),
            Tagger::External(pool) => pool.tag(id.to_string(), text.to_string()).await,
            Tagger::ExternalWithFallback(pool) => match pool.tag(id.to_string(), text.to_string()).await {
                Ok(p) => Ok(p),
                Err(err) => {
                    tracing::warn!(error = %err, "adapter failed, using lexicon fallback");
                    let mut p = lexicon_tag(id, text, &self.lexicon);
                    p.tagger_id = FALLBACK_TAGGER_ID.to_string();
                    Ok(p)
                }
            },
        }
    }
}

/// Every `*.jsonl` file in `dir`, named by file stem.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<Corpus>, StartupError> {
    let entries = std::fs::read_dir(dir).map_err(|e| StartupError::CorpusDir(dir.display().to_string(), e))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "jsonl"))
        .collect();
    paths.sort();
    let mut corpora = Vec::new();
    for path in paths {
        match load_jsonl(&path) {
            Ok(c) => corpora.push(c),
            // prediction files share the directory; skip anything that is not a corpus
            Err(DatasetError::Parse { .. }) => tracing::info!(path = %path.display(), "skipping non-corpus file"),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(corpora)
}
