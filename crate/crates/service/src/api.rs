use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use praisetag_core::annotation::tokenize;
use praisetag_core::dataset::compute_stats;
use praisetag_core::evaluation::{evaluate_predictions, evaluate_runs, DEFAULT_TAU};
use praisetag_core::feedback::render_feedback;
use praisetag_core::tagging::{classify_correctness, derive_labels, lexicon_tag, CorrectiveDecision};
use praisetag_core::{
    AdapterError, EntityLabel, EvalError, FeedbackError, FeedbackMessage, PraiseLabels, Prediction, TagDistribution,
    Token,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::state::AppState;

/// Longest accepted response text, in characters.
pub const MAX_TEXT_CHARS: usize = 10_000;
const DEFAULT_REQUEST_ID: &str = "request";

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.code, message: &self.message })).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(rejection: JsonRejection) -> Self {
        ApiError::bad_request(rejection.body_text())
    }
}

impl From<AdapterError> for ApiError {
    fn from(err: AdapterError) -> Self {
        match err {
            AdapterError::Timeout(_) => ApiError::new(StatusCode::GATEWAY_TIMEOUT, "adapter_timeout", err.to_string()),
            _ => ApiError::new(StatusCode::BAD_GATEWAY, "adapter_error", err.to_string()),
        }
    }
}

impl From<FeedbackError> for ApiError {
    fn from(err: FeedbackError) -> Self {
        match err {
            FeedbackError::TemplateMissing(_) | FeedbackError::MissingPlaceholder(_) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "template_missing", err.to_string())
            }
            _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "feedback_error", err.to_string()),
        }
    }
}

impl From<EvalError> for ApiError {
    fn from(err: EvalError) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_predictions", err.to_string())
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Deserialize)]
pub struct TextRequest {
    text: String,
    #[serde(default)]
    id: Option<String>,
}

impl TextRequest {
    fn check(&self) -> Result<&str, ApiError> {
        if self.text.trim().is_empty() {
            return Err(ApiError::bad_request("text is empty"));
        }
        let chars = self.text.chars().count();
        if chars > MAX_TEXT_CHARS {
            return Err(ApiError::bad_request(format!("text has {chars} characters; the limit is {MAX_TEXT_CHARS}")));
        }
        Ok(self.id.as_deref().unwrap_or(DEFAULT_REQUEST_ID))
    }
}

#[derive(Debug, Serialize)]
pub struct AnnotatedSpan {
    label: EntityLabel,
    token_start: usize,
    token_end: usize,
    confidence: Option<f64>,
    quote: String,
    char_start: usize,
    char_end: usize,
}

#[derive(Debug, Serialize)]
pub struct AnnotateResponse {
    tokens: Vec<Token>,
    spans: Vec<AnnotatedSpan>,
    labels: PraiseLabels,
    verdict: CorrectiveDecision,
    tagger_id: String,
    latency_ms: u64,
}

async fn tag_request(state: &AppState, req: &TextRequest) -> Result<(Vec<Token>, Prediction), ApiError> {
    let id = req.check()?;
    let prediction = state.tag(id, &req.text).await?;
    let tokens = tokenize(&req.text);
    Ok((tokens, prediction))
}

pub async fn annotate(
    State(state): State<AppState>,
    payload: Result<Json<TextRequest>, JsonRejection>,
) -> ApiResult<AnnotateResponse> {
    let Json(req) = payload?;
    let (tokens, prediction) = tag_request(&state, &req).await?;
    let mut spans = prediction.spans.clone();
    spans.sort_by_key(|s| s.token_start);
    let labels = derive_labels(&spans);
    let spans = spans
        .iter()
        .map(|s| {
            let char_start = tokens[s.token_start].char_start;
            let char_end = tokens[s.token_end - 1].char_end;
            AnnotatedSpan {
                label: s.label,
                token_start: s.token_start,
                token_end: s.token_end,
                confidence: s.confidence,
                quote: req.text.chars().skip(char_start).take(char_end - char_start).collect(),
                char_start,
                char_end,
            }
        })
        .collect();
    Ok(Json(AnnotateResponse {
        tokens,
        spans,
        labels,
        verdict: classify_correctness(labels),
        tagger_id: prediction.tagger_id,
        latency_ms: prediction.latency_ms,
    }))
}

pub async fn feedback(
    State(state): State<AppState>,
    payload: Result<Json<TextRequest>, JsonRejection>,
) -> ApiResult<FeedbackMessage> {
    let Json(req) = payload?;
    let (tokens, prediction) = tag_request(&state, &req).await?;
    Ok(Json(render_feedback(&req.text, &tokens, &prediction, &state.feedback)?))
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum PredictionInput {
    Single(Vec<Prediction>),
    Sets(Vec<Vec<Prediction>>),
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalTagger {
    /// The built-in lexicon, whatever the service is configured with.
    Lexicon,
    /// The service's configured tagger.
    Configured,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateRequest {
    gold_corpus_ref: String,
    #[serde(default)]
    predictions: Option<PredictionInput>,
    #[serde(default)]
    tagger: Option<EvalTagger>,
    #[serde(default)]
    tau: Option<f64>,
}

/// One prediction set yields an `EvalReport`; several yield a `RunsReport`
/// with per-metric mean and std.
pub async fn evaluate(
    State(state): State<AppState>,
    payload: Result<Json<EvaluateRequest>, JsonRejection>,
) -> ApiResult<Value> {
    let Json(req) = payload?;
    let corpus = state
        .corpora
        .get(&req.gold_corpus_ref)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown_corpus", format!("no corpus `{}`", req.gold_corpus_ref)))?;
    let tau = req.tau.unwrap_or(DEFAULT_TAU);
    let gold = corpus.responses();

    let sets = match (req.predictions, req.tagger) {
        (Some(_), Some(_)) => return Err(ApiError::bad_request("give either predictions or tagger, not both")),
        (None, None) => return Err(ApiError::bad_request("one of predictions or tagger is required")),
        (Some(PredictionInput::Single(p)), None) => vec![p],
        (Some(PredictionInput::Sets(sets)), None) => sets,
        (None, Some(EvalTagger::Lexicon)) => vec![gold.iter().map(|r| lexicon_tag(r.id(), r.text(), &state.lexicon)).collect()],
        (None, Some(EvalTagger::Configured)) => {
            let mut preds = Vec::with_capacity(gold.len());
            for r in gold {
                preds.push(state.tag(r.id(), r.text()).await?);
            }
            vec![preds]
        }
    };

    let body = match sets.as_slice() {
        [] => return Err(ApiError::bad_request("predictions holds no prediction sets")),
        [single] => serde_json::to_value(evaluate_predictions(gold, single, tau)?),
        many => serde_json::to_value(evaluate_runs(gold, many, tau)?),
    };
    Ok(Json(body.expect("reports serialize")))
}

pub async fn corpus_stats(State(state): State<AppState>, Path(name): Path<String>) -> ApiResult<TagDistribution> {
    let corpus = state
        .corpora
        .get(&name)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown_corpus", format!("no corpus `{name}`")))?;
    compute_stats(corpus)
        .map(Json)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "empty_corpus", e.to_string()))
}

#[derive(Serialize)]
pub struct Health {
    status: &'static str,
}

pub async fn health() -> Json<Health> {
    Json(Health { status: "ok" })
}

pub async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route")
}
