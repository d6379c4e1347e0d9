#![allow(dead_code)]

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};
use std::time::Duration;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use praisetag_core::dataset::load_jsonl;
use praisetag_core::feedback::FeedbackConfig;
use praisetag_core::{AdapterEndpoint, Lexicon};
use praisetag_service::{router, AdapterPool, AppState, Tagger};
use serde_json::Value;
use tower::ServiceExt;

pub const MIXED: &str = "Good job! You got the right answer, and you stuck with it";

pub fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

pub fn fixture_corpora() -> Vec<praisetag_core::dataset::Corpus> {
    ["praise_corpus", "tag_count_corpus", "four_cases_gold"]
        .iter()
        .map(|n| load_jsonl(repo_path(&format!("fixtures/{n}.jsonl"))).unwrap())
        .collect()
}

pub fn lexicon_app() -> Router {
    router(AppState::new(Tagger::Lexicon, Lexicon::default_praise(), FeedbackConfig::default(), fixture_corpora()))
}

/// Starts a line-oriented TCP adapter whose reply to each request is
/// computed by `reply`; `None` closes the connection without answering.
pub fn spawn_adapter<F>(reply: F) -> String
where
    F: Fn(&Value, usize) -> Option<String> + Send + Sync + 'static,
{
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let reply = Arc::new(reply);
    std::thread::spawn(move || {
        let mut counter = 0usize;
        for stream in listener.incoming() {
            let Ok(stream) = stream else { continue };
            let reply = Arc::clone(&reply);
            let start = counter;
            counter += 1000;
            std::thread::spawn(move || {
                let mut writer = stream.try_clone().unwrap();
                let reader = BufReader::new(stream);
                for (i, line) in reader.lines().enumerate() {
                    let Ok(line) = line else { return };
                    let request: Value = serde_json::from_str(&line).unwrap();
                    match reply(&request, start + i) {
                        Some(out) => {
                            if writer.write_all(format!("{out}\n").as_bytes()).is_err() {
                                return;
                            }
                        }
                        None => return,
                    }
                }
            });
        }
    });
    format!("tcp://{addr}")
}

pub fn pool(endpoint: &str, timeout: Duration) -> Arc<AdapterPool> {
    Arc::new(AdapterPool::new(AdapterEndpoint::parse(endpoint).unwrap(), timeout, 4))
}

pub fn app_with(tagger: Tagger) -> Router {
    router(AppState::new(tagger, Lexicon::default_praise(), FeedbackConfig::default(), fixture_corpora()))
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let body = body.map(|b| Body::from(b.to_string())).unwrap_or_else(Body::empty);
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json").body(body).unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = to_bytes(res.into_body(), usize::MAX).await.unwrap();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

pub async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, "POST", uri, Some(body)).await
}

fn validators() -> &'static HashMap<String, jsonschema::Validator> {
    static CACHE: OnceLock<HashMap<String, jsonschema::Validator>> = OnceLock::new();
    CACHE.get_or_init(|| {
        std::fs::read_dir(repo_path("schemas"))
            .unwrap()
            .map(|e| e.unwrap().path())
            .map(|path| {
                let name = path.file_name().unwrap().to_str().unwrap().trim_end_matches(".schema.json").to_string();
                let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
                (name, jsonschema::validator_for(&schema).unwrap())
            })
            .collect()
    })
}

pub fn assert_schema(name: &str, instance: &Value) {
    let validator = &validators()[name];
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{name} schema violations: {errors:#?}\n{instance}");
}
