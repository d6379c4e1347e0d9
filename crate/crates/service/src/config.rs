//! Service configuration, read from TOML.
//!
//! ```toml
//! bind = "127.0.0.1:8080"
//! tagger = "external-with-fallback"   # lexicon | external | external-with-fallback
//! adapter = "tcp://127.0.0.1:9000"    # tcp://, http(s):// or a command line
//! adapter_pool_size = 4
//! request_timeout_ms = 10000
//! corpus_dir = "fixtures"
//! lexicon = "lexicon.json"            # optional, defaults to the built-in one
//! cors_origins = ["http://localhost:5173"]
//!
//! [feedback]
//! confidence_threshold = 0.5
//! allow_retry_prompt = true
//! templates = "templates.json"        # optional
//! ```
//!
//! Relative paths resolve against the config file's directory.
//! `PRAISETAG_BIND` and `PRAISETAG_ADAPTER` override `bind` and `adapter`.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use praisetag_core::feedback::DEFAULT_CONFIDENCE_THRESHOLD;
use praisetag_core::tagging::DEFAULT_ADAPTER_TIMEOUT;
use praisetag_core::AdapterEndpoint;
use serde::Deserialize;
use thiserror::Error;

pub const BIND_ENV: &str = "PRAISETAG_BIND";
pub const ADAPTER_ENV: &str = "PRAISETAG_ADAPTER";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Parse { path: PathBuf, source: Box<toml::de::Error> },
    #[error("invalid bind address `{0}`")]
    Bind(String),
    #[error("tagger `{0}` needs an adapter endpoint")]
    MissingAdapter(&'static str),
    #[error("invalid adapter endpoint `{0}`")]
    Adapter(String),
    #[error("{0} does not exist")]
    MissingPath(PathBuf),
    #[error("request_timeout_ms must be > 0")]
    Timeout,
    #[error("adapter_pool_size must be > 0")]
    PoolSize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaggerMode {
    #[default]
    Lexicon,
    External,
    ExternalWithFallback,
}

impl TaggerMode {
    fn name(self) -> &'static str {
        match self {
            TaggerMode::Lexicon => "lexicon",
            TaggerMode::External => "external",
            TaggerMode::ExternalWithFallback => "external-with-fallback",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeedbackSection {
    pub confidence_threshold: f64,
    pub allow_retry_prompt: bool,
    pub templates: Option<PathBuf>,
}

impl Default for FeedbackSection {
    fn default() -> Self {
        FeedbackSection { confidence_threshold: DEFAULT_CONFIDENCE_THRESHOLD, allow_retry_prompt: true, templates: None }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: String,
    pub tagger: TaggerMode,
    pub adapter: Option<String>,
    pub adapter_pool_size: usize,
    pub request_timeout_ms: u64,
    pub corpus_dir: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub cors_origins: Vec<String>,
    pub feedback: FeedbackSection,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: "127.0.0.1:8080".to_string(),
            tagger: TaggerMode::Lexicon,
            adapter: None,
            adapter_pool_size: 4,
            request_timeout_ms: DEFAULT_ADAPTER_TIMEOUT.as_millis() as u64,
            corpus_dir: None,
            lexicon: None,
            cors_origins: Vec::new(),
            feedback: FeedbackSection::default(),
        }
    }
}

impl ServiceConfig {
    /// Reads and validates a config file, applying env overrides.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let mut config = Self::from_toml(&raw).map_err(|source| ConfigError::Parse { path: path.into(), source })?;
        config.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        config.apply_env(|k| std::env::var(k).ok());
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml(raw: &str) -> Result<Self, Box<toml::de::Error>> {
        toml::from_str(raw).map_err(Box::new)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p.as_mut() {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.corpus_dir);
        fix(&mut self.lexicon);
        fix(&mut self.feedback.templates);
    }

    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) {
        if let Some(bind) = get(BIND_ENV).filter(|v| !v.is_empty()) {
            self.bind = bind;
        }
        if let Some(adapter) = get(ADAPTER_ENV).filter(|v| !v.is_empty()) {
            self.adapter = Some(adapter);
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.bind_addr()?;
        if self.request_timeout_ms == 0 {
            return Err(ConfigError::Timeout);
        }
        if self.adapter_pool_size == 0 {
            return Err(ConfigError::PoolSize);
        }
        if self.tagger != TaggerMode::Lexicon {
            self.adapter_endpoint()?.ok_or(ConfigError::MissingAdapter(self.tagger.name()))?;
        }
        for path in [&self.corpus_dir, &self.lexicon, &self.feedback.templates].into_iter().flatten() {
            if !path.exists() {
                return Err(ConfigError::MissingPath(path.clone()));
            }
        }
        Ok(())
    }

    pub fn bind_addr(&self) -> Result<SocketAddr, ConfigError> {
        self.bind.parse().map_err(|_| ConfigError::Bind(self.bind.clone()))
    }

    pub fn adapter_endpoint(&self) -> Result<Option<AdapterEndpoint>, ConfigError> {
        match &self.adapter {
            None => Ok(None),
            Some(spec) => AdapterEndpoint::parse(spec).map(Some).ok_or_else(|| ConfigError::Adapter(spec.clone())),
        }
    }

    pub fn request_timeout(&self) -> Duration {
        Duration::from_millis(self.request_timeout_ms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_keys() {
        let raw = r#"
            bind = "0.0.0.0:9090"
            tagger = "external-with-fallback"
            adapter = "tcp://127.0.0.1:9000"
            request_timeout_ms = 2500
            cors_origins = ["http://localhost:5173"]
            [feedback]
            confidence_threshold = 0.7
        "#;
        let c = ServiceConfig::from_toml(raw).unwrap();
        assert_eq!(c.tagger, TaggerMode::ExternalWithFallback);
        assert_eq!(c.request_timeout(), Duration::from_millis(2500));
        assert_eq!(c.feedback.confidence_threshold, 0.7);
        assert!(c.feedback.allow_retry_prompt);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn env_overrides() {
        let mut c = ServiceConfig::default();
        c.apply_env(|k| match k {
            BIND_ENV => Some("127.0.0.1:1".into()),
            ADAPTER_ENV => Some("tcp://x:1".into()),
            _ => None,
        });
        assert_eq!(c.bind, "127.0.0.1:1");
        assert_eq!(c.adapter.as_deref(), Some("tcp://x:1"));
    }

    #[test]
    fn rejects_bad_configs() {
        let external = ServiceConfig { tagger: TaggerMode::External, ..Default::default() };
        assert!(matches!(external.validate(), Err(ConfigError::MissingAdapter("external"))));
        let zero = ServiceConfig { request_timeout_ms: 0, ..Default::default() };
        assert!(matches!(zero.validate(), Err(ConfigError::Timeout)));
        let missing = ServiceConfig { corpus_dir: Some("/nonexistent/corpora".into()), ..Default::default() };
        assert!(matches!(missing.validate(), Err(ConfigError::MissingPath(_))));
        assert!(ServiceConfig::from_toml("bogus = 1").is_err());
    }
}
