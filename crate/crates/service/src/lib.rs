//! HTTP session service. A client creates a session for a problem, then
//! answers the pending query round by round until the session converges.
//!
//! | method | path                    | body                          |
//! |--------|-------------------------|-------------------------------|
//! | GET    | `/specs`                |                               |
//! | POST   | `/sessions`             | `{"spec": "lmh27"}`           |
//! | GET    | `/sessions/{id}`        |                               |
//! | POST   | `/sessions/{id}/answers`| `{"outcome": "Low"}`          |
//!
//! Errors carry `{"error": code, "message": text}`.

pub mod api;
mod error;
pub mod store;

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::http::{header, HeaderValue, Method};
use axum::routing::{get, post};
use axum::Router;
use tower_http::cors::{AllowOrigin, CorsLayer};

use searchsynth_core::corpus::Corpus;

pub use api::{AppState, SessionView, SpecSummary};
pub use error::ApiError;
pub use store::{Mode, ServiceConfig, Store, DEFAULT_TTL};

pub fn router(store: Arc<Store>) -> Router {
    let origin = match &store.config.cors_origin {
        Some(o) => match HeaderValue::from_str(o) {
            Ok(v) => AllowOrigin::exact(v),
            Err(_) => AllowOrigin::any(),
        },
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/specs", get(api::list_specs))
        .route("/sessions", post(api::create_session))
        .route("/sessions/{id}", get(api::get_session))
        .route("/sessions/{id}/answers", post(api::post_answer))
        .layer(cors)
        .with_state(store)
}

/// Serves until the process is stopped. Snapshots found in the configured
/// directory are restored first.
pub async fn serve(addr: SocketAddr, corpus: Corpus, config: ServiceConfig) -> std::io::Result<()> {
    let store = Arc::new(Store::new(corpus, config));
    let restored = {
        let s = store.clone();
        tokio::task::spawn_blocking(move || s.restore())
            .await
            .unwrap_or(0)
    };
    if restored > 0 {
        eprintln!("restored {restored} sessions");
    }
    let sweeper = store.clone();
    let every = (store.config.ttl / 4).clamp(Duration::from_secs(1), Duration::from_secs(600));
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(every);
        loop {
            tick.tick().await;
            sweeper.evict_expired();
        }
    });
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(store)).await
}
