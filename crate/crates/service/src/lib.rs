//! Stateless HTTP/JSON facade: tagging, feedback, evaluation and corpus
//! statistics.
//!
//! | route | body |
//! |-------|------|
//! | `POST /v1/annotate` | `{text, id?}` |
//! | `POST /v1/feedback` | `{text, id?}` |
//! | `POST /v1/evaluate` | `{gold_corpus_ref, predictions \| tagger, tau?}` |
//! | `GET /v1/corpora/{name}/stats` | |
//! | `GET /health` | |
//!
//! Errors are `{"error": code, "message": text}` with a 4xx/5xx status.

pub mod api;
pub mod config;
pub mod state;

use std::time::Instant;

use axum::extract::Request;
use axum::http::{header, HeaderValue, Method};
use axum::middleware::{self, Next};
use axum::response::Response;
use axum::routing::{get, post};
use axum::Router;
use tokio::net::TcpListener;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

pub use api::MAX_TEXT_CHARS;
pub use config::{ConfigError, ServiceConfig, TaggerMode};
pub use state::{AdapterPool, AppState, StartupError, Tagger};

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(api::health))
        .route("/v1/annotate", post(api::annotate))
        .route("/v1/feedback", post(api::feedback))
        .route("/v1/evaluate", post(api::evaluate))
        .route("/v1/corpora/{name}/stats", get(api::corpus_stats))
        .fallback(api::not_found)
        .with_state(state)
        .layer(middleware::from_fn(log_request))
}

/// Adds CORS for the given origins; `"*"` allows any origin and an empty
/// list leaves CORS off.
pub fn with_cors(router: Router, origins: &[String]) -> Router {
    if origins.is_empty() {
        return router;
    }
    let layer = CorsLayer::new().allow_methods([Method::GET, Method::POST]).allow_headers([header::CONTENT_TYPE]);
    let layer = if origins.iter().any(|o| o == "*") {
        layer.allow_origin(Any)
    } else {
        let list: Vec<HeaderValue> = origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()).collect();
        layer.allow_origin(AllowOrigin::list(list))
    };
    router.layer(layer)
}

async fn log_request(req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let path = req.uri().path().to_string();
    let started = Instant::now();
    let response = next.run(req).await;
    tracing::info!(
        method = %method,
        path = %path,
        status = response.status().as_u16(),
        latency_ms = started.elapsed().as_millis() as u64,
        "request"
    );
    response
}

/// One JSON object per line on stderr. `RUST_LOG` adjusts the filter.
pub fn init_logging() {
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info"));
    let _ = tracing_subscriber::fmt()
        .json()
        .with_current_span(false)
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Startup(#[from] StartupError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("binding {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error("server: {0}")]
    Io(#[from] std::io::Error),
}

/// Binds, serves until Ctrl-C, then drains in-flight requests.
pub async fn serve(config: ServiceConfig) -> Result<(), ServeError> {
    let state = AppState::from_config(&config)?;
    let addr = config.bind_addr()?;
    let listener = TcpListener::bind(addr).await.map_err(|source| ServeError::Bind { addr: addr.to_string(), source })?;
    tracing::info!(addr = %listener.local_addr()?, corpora = state.corpora.len(), "listening");
    let app = with_cors(router(state), &config.cors_origins);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
