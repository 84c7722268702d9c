use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;
use tower_http::services::ServeDir;

use crate::arena::{Arena, ArenaError, CreateSession, Leaderboard, SubmitRanking};

impl IntoResponse for ArenaError {
    fn into_response(self) -> Response {
        let status = match &self {
            ArenaError::InvalidRequest(_) => StatusCode::BAD_REQUEST,
            ArenaError::NotFound(_) => StatusCode::NOT_FOUND,
            ArenaError::MissingOutput { .. } | ArenaError::InvalidPermutation(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ArenaError::DuplicateSubmission { .. } => StatusCode::CONFLICT,
            ArenaError::Log(_) | ArenaError::Replay(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({ "error": self.kind(), "message": self.to_string() }))).into_response()
    }
}

/// Writes go through the arena mutex one at a time; leaderboard reads take a
/// snapshot published after each write and never wait on the writer.
pub struct Service {
    arena: Mutex<Arena>,
    board: RwLock<Arc<Leaderboard>>,
    token: Option<String>,
}

impl Service {
    pub fn new(arena: Arena, token: Option<String>) -> Self {
        let board = RwLock::new(Arc::new(arena.leaderboard()));
        Service {
            arena: Mutex::new(arena),
            board,
            token,
        }
    }

    fn write<T>(&self, f: impl FnOnce(&mut Arena) -> Result<T, ArenaError>) -> Result<T, ArenaError> {
        let mut arena = self.arena.lock().unwrap_or_else(|p| p.into_inner());
        let out = f(&mut arena)?;
        *self.board.write().unwrap_or_else(|p| p.into_inner()) = Arc::new(arena.leaderboard());
        Ok(out)
    }

    fn read<T>(&self, f: impl FnOnce(&Arena) -> T) -> T {
        f(&self.arena.lock().unwrap_or_else(|p| p.into_inner()))
    }

    pub fn leaderboard(&self) -> Arc<Leaderboard> {
        self.board.read().unwrap_or_else(|p| p.into_inner()).clone()
    }
}

type Shared = Arc<Service>;

#[derive(Debug, Clone, Default)]
pub struct ServeOptions {
    /// Built UI bundle, served for any path the API does not claim.
    pub ui_dir: Option<PathBuf>,
    /// Shared bearer token required on every route except `/healthz`.
    pub token: Option<String>,
}

pub fn router(arena: Arena, opts: &ServeOptions) -> Router {
    let service: Shared = Arc::new(Service::new(arena, opts.token.clone()));
    let api = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/next", get(next))
        .route("/sessions/{id}/rankings", post(submit))
        .route("/leaderboard", get(leaderboard))
        .route("/images/{id}/{index}/{label}", get(image))
        .route_layer(middleware::from_fn_with_state(service.clone(), require_token));
    let mut app = Router::new().route("/healthz", get(healthz)).merge(api);
    if let Some(dir) = &opts.ui_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    app.with_state(service)
}

pub async fn serve(addr: SocketAddr, arena: Arena, opts: ServeOptions) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "arena listening");
    axum::serve(listener, router(arena, &opts)).await
}

/// [`serve`] on a fresh multi-threaded runtime, for synchronous callers.
pub fn serve_blocking(addr: SocketAddr, arena: Arena, opts: ServeOptions) -> std::io::Result<()> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?
        .block_on(serve(addr, arena, opts))
}

async fn require_token(State(svc): State<Shared>, headers: HeaderMap, req: Request, next: Next) -> Response {
    if let Some(token) = &svc.token {
        let presented = headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if presented != Some(token.as_str()) {
            return (StatusCode::UNAUTHORIZED, Json(json!({ "error": "Unauthorized", "message": "bad or missing token" })))
                .into_response();
        }
    }
    next.run(req).await
}

async fn healthz() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn create_session(State(svc): State<Shared>, Json(req): Json<CreateSession>) -> Result<Response, ArenaError> {
    let created = svc.write(|a| a.create_session(&req))?;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn next(State(svc): State<Shared>, Path(id): Path<String>) -> Result<Response, ArenaError> {
    Ok(Json(svc.read(|a| a.next(&id))?).into_response())
}

async fn submit(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<SubmitRanking>,
) -> Result<Response, ArenaError> {
    Ok(Json(svc.write(|a| a.submit(&id, &req))?).into_response())
}

async fn leaderboard(State(svc): State<Shared>) -> Json<Leaderboard> {
    Json(svc.leaderboard().as_ref().clone())
}

async fn image(State(svc): State<Shared>, Path((id, index, label)): Path<(String, usize, String)>) -> Result<Response, ArenaError> {
    let path = svc.read(|a| a.image_path(&id, index, &label))?;
    let bytes = tokio::fs::read(&path)
        .await
        .map_err(|_| ArenaError::NotFound(format!("image {label} of sample {index}")))?;
    Ok(([(header::CONTENT_TYPE, "image/png"), (header::CACHE_CONTROL, "no-store")], bytes).into_response())
}
