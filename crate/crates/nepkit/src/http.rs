//! JSON API over an [`Engine`], used by the editor front end.
//!
//! Errors are returned as `{"error": <code>, "message": <text>}` with status
//! 404 for unknown resources, 409 for actions the issue's state does not
//! allow, 422 for invalid payloads and 401 for a missing editor token.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use nepkit_core::time::parse_date;
use nepkit_core::{Date, Mode, PaperRecord, Report, Stage, StageSnapshot};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

use crate::analytics::{self, AnalyticsOptions};
use crate::config::ServiceConfig;
use crate::engine::{Engine, EngineOptions};
use crate::error::{Error, ErrorClass};

pub const EDITOR_TOKEN_HEADER: &str = "x-editor-token";

#[derive(Clone)]
struct AppState {
    engine: Arc<Engine>,
    config: Arc<ServiceConfig>,
}

#[derive(Debug)]
enum ApiError {
    Engine(Error),
    BadRequest(String),
    Unauthorized,
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError::Engine(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code, message) = match self {
            ApiError::Engine(e) => {
                let status = match e.class() {
                    ErrorClass::NotFound => StatusCode::NOT_FOUND,
                    ErrorClass::State => StatusCode::CONFLICT,
                    ErrorClass::Validation => StatusCode::UNPROCESSABLE_ENTITY,
                    ErrorClass::Internal => StatusCode::INTERNAL_SERVER_ERROR,
                };
                (status, e.code(), e.to_string())
            }
            ApiError::BadRequest(m) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_request", m),
            ApiError::Unauthorized => (
                StatusCode::UNAUTHORIZED,
                "unauthorized",
                format!("missing or wrong {EDITOR_TOKEN_HEADER}"),
            ),
        };
        (status, Json(json!({ "error": code, "message": message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Runs blocking engine work off the async executor.
async fn blocking<T, F>(state: &AppState, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Engine) -> crate::Result<T> + Send + 'static,
{
    let engine = Arc::clone(&state.engine);
    tokio::task::spawn_blocking(move || f(&engine))
        .await
        .map_err(|e| ApiError::BadRequest(format!("request aborted: {e}")))?
        .map_err(ApiError::Engine)
}

fn date_param(text: &str) -> ApiResult<Date> {
    parse_date(text)
        .ok_or_else(|| ApiError::BadRequest(format!("invalid date `{text}`, expected YYYY-MM-DD")))
}

fn authorize(state: &AppState, code: &str, headers: &HeaderMap) -> ApiResult<()> {
    let Some(expected) = state.config.editor_tokens.get(code) else {
        return Ok(());
    };
    let given = headers
        .get(EDITOR_TOKEN_HEADER)
        .and_then(|v| v.to_str().ok());
    if given == Some(expected.as_str()) {
        Ok(())
    } else {
        Err(ApiError::Unauthorized)
    }
}

pub fn router(engine: Arc<Engine>, config: ServiceConfig) -> Router {
    let state = AppState {
        engine,
        config: Arc::new(config),
    };
    Router::new()
        .route("/health", get(health))
        .route("/reports", get(list_reports).post(create_report))
        .route("/reports/{code}/issues", get(list_pending))
        .route(
            "/reports/{code}/issues/{date}",
            get(issue_status).delete(delete_issue),
        )
        .route("/reports/{code}/issues/{date}/open", post(open_issue))
        .route(
            "/reports/{code}/issues/{date}/selection",
            post(submit_selection),
        )
        .route(
            "/reports/{code}/issues/{date}/ordering",
            post(submit_ordering),
        )
        .route("/reports/{code}/issues/{date}/send", post(send_issue))
        .route("/reports/{code}/issues/{date}/snapshot", get(snapshot))
        .route(
            "/reports/{code}/subscribers",
            get(list_subscribers).post(subscribe),
        )
        .route("/reports/{code}/subscribers/{address}", delete(unsubscribe))
        .route("/reports/{code}/train", post(train))
        .route("/metrics/{kind}", get(metric))
        .with_state(state)
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

#[derive(Serialize)]
struct ReportSummary {
    #[serde(flatten)]
    report: Report,
    subscribers: usize,
}

async fn list_reports(State(state): State<AppState>) -> ApiResult<Json<Vec<ReportSummary>>> {
    let list = blocking(&state, |e| {
        e.reports()
            .into_iter()
            .map(|report| {
                let subscribers = e.subscriber_count(&report.code)?;
                Ok(ReportSummary {
                    report,
                    subscribers,
                })
            })
            .collect()
    })
    .await?;
    Ok(Json(list))
}

#[derive(Deserialize)]
struct NewReport {
    code: String,
    subject: String,
    editor_name: String,
}

async fn create_report(
    State(state): State<AppState>,
    body: Result<Json<NewReport>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Report>)> {
    let Json(new) = body?;
    let report = blocking(&state, move |e| {
        e.add_report(&new.code, &new.subject, &new.editor_name)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(report)))
}

async fn list_pending(
    State(state): State<AppState>,
    Path(code): Path<String>,
) -> ApiResult<Json<Value>> {
    let pending = blocking(&state, move |e| e.list_pending(&code)).await?;
    Ok(Json(json!({ "issues": pending })))
}

async fn issue_status(
    State(state): State<AppState>,
    Path((code, date)): Path<(String, String)>,
) -> ApiResult<Json<Value>> {
    let date = date_param(&date)?;
    let status = blocking(&state, move |e| e.issue_status(&code, date)).await?;
    Ok(Json(json!(status)))
}

#[derive(Deserialize)]
struct OpenRequest {
    mode: Mode,
}

async fn open_issue(
    State(state): State<AppState>,
    Path((code, date)): Path<(String, String)>,
    headers: HeaderMap,
    body: Result<Json<OpenRequest>, JsonRejection>,
) -> ApiResult<Json<StageSnapshot>> {
    let date = date_param(&date)?;
    authorize(&state, &code, &headers)?;
    let Json(req) = body?;
    Ok(Json(
        blocking(&state, move |e| e.open_issue(&code, date, req.mode)).await?,
    ))
}

#[derive(Deserialize)]
struct PaperList {
    papers: Vec<String>,
}

async fn submit_selection(
    State(state): State<AppState>,
    Path((code, date)): Path<(String, String)>,
    headers: HeaderMap,
    body: Result<Json<PaperList>, JsonRejection>,
) -> ApiResult<Json<StageSnapshot>> {
    let date = date_param(&date)?;
    authorize(&state, &code, &headers)?;
    let Json(req) = body?;
    Ok(Json(
        blocking(&state, move |e| {
            e.submit_selection(&code, date, &req.papers)
        })
        .await?,
    ))
}

async fn submit_ordering(
    State(state): State<AppState>,
    Path((code, date)): Path<(String, String)>,
    headers: HeaderMap,
    body: Result<Json<PaperList>, JsonRejection>,
) -> ApiResult<Json<StageSnapshot>> {
    let date = date_param(&date)?;
    authorize(&state, &code, &headers)?;
    let Json(req) = body?;
    Ok(Json(
        blocking(&state, move |e| e.submit_ordering(&code, date, &req.papers)).await?,
    ))
}

async fn send_issue(
    State(state): State<AppState>,
    Path((code, date)): Path<(String, String)>,
    headers: HeaderMap,
) -> ApiResult<Json<Value>> {
    let date = date_param(&date)?;
    authorize(&state, &code, &headers)?;
    let receipt = blocking(&state, move |e| e.send_issue(&code, date)).await?;
    Ok(Json(json!(receipt)))
}

async fn delete_issue(
    State(state): State<AppState>,
    Path((code, date)): Path<(String, String)>,
    headers: HeaderMap,
) -> ApiResult<Json<Value>> {
    let date = date_param(&date)?;
    authorize(&state, &code, &headers)?;
    let status = blocking(&state, move |e| e.delete_issue(&code, date)).await?;
    Ok(Json(json!(status)))
}

#[derive(Deserialize)]
struct StageQuery {
    stage: Option<String>,
}

#[derive(Serialize)]
struct SnapshotView {
    snapshot: StageSnapshot,
    papers: Vec<PaperRecord>,
}

/// Latest snapshot at a stage (default: source) with the full paper records,
/// so a client can show titles and abstracts.
async fn snapshot(
    State(state): State<AppState>,
    Path((code, date)): Path<(String, String)>,
    query: Result<Query<StageQuery>, QueryRejection>,
) -> ApiResult<Json<SnapshotView>> {
    let date = date_param(&date)?;
    let Query(q) = query?;
    let stage = match q.stage.as_deref() {
        None => Stage::Source,
        Some(s) => {
            Stage::parse(s).ok_or_else(|| ApiError::BadRequest(format!("unknown stage `{s}`")))?
        }
    };
    let view = blocking(&state, move |e| {
        let snapshot = e
            .latest_snapshot(&code, date, stage)?
            .ok_or_else(|| Error::not_found("snapshot", format!("{code}/{date}/{stage}")))?;
        let papers = snapshot
            .paper_handles
            .iter()
            .map(|h| e.paper(h).ok_or_else(|| Error::not_found("paper", h)))
            .collect::<crate::Result<_>>()?;
        Ok(SnapshotView { snapshot, papers })
    })
    .await?;
    Ok(Json(view))
}

async fn list_subscribers(
    State(state): State<AppState>,
    Path(code): Path<String>,
) -> ApiResult<Json<Value>> {
    let subs = blocking(&state, move |e| e.subscribers(&code)).await?;
    Ok(Json(
        json!({ "subscribers": subs.addresses().collect::<Vec<_>>() }),
    ))
}

#[derive(Deserialize)]
struct SubscribeRequest {
    address: String,
}

async fn subscribe(
    State(state): State<AppState>,
    Path(code): Path<String>,
    body: Result<Json<SubscribeRequest>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let Json(req) = body?;
    let added = blocking(&state, move |e| e.subscribe(&code, &req.address)).await?;
    Ok(Json(json!({ "added": added })))
}

async fn unsubscribe(
    State(state): State<AppState>,
    Path((code, address)): Path<(String, String)>,
) -> ApiResult<Json<Value>> {
    let removed = blocking(&state, move |e| e.unsubscribe(&code, &address)).await?;
    Ok(Json(json!({ "removed": removed })))
}

async fn train(
    State(state): State<AppState>,
    Path(code): Path<String>,
    headers: HeaderMap,
) -> ApiResult<Json<Value>> {
    authorize(&state, &code, &headers)?;
    let model = blocking(&state, move |e| e.train(&code)).await?;
    Ok(Json(json!({
        "report_code": model.report_code,
        "trained_issue_count": model.trained_issue_count,
        "vocabulary_size": model.vocabulary.len(),
    })))
}

#[derive(Deserialize)]
struct MetricQuery {
    n: Option<usize>,
    min_presorted: Option<usize>,
    threshold: Option<f64>,
    chunk: Option<f64>,
}

async fn metric(
    State(state): State<AppState>,
    Path(kind): Path<String>,
    query: Result<Query<MetricQuery>, QueryRejection>,
) -> ApiResult<Json<Value>> {
    let Query(q) = query?;
    let defaults = state.config.analytics();
    let opts = AnalyticsOptions {
        threshold_minutes: q.threshold.unwrap_or(defaults.threshold_minutes),
        chunk_minutes: q.chunk.unwrap_or(defaults.chunk_minutes),
        min_presorted: q.min_presorted.unwrap_or(defaults.min_presorted),
    };
    let n = q.n.unwrap_or(5);
    let value = blocking(&state, move |e| metric_value(e, &kind, n, opts)).await?;
    Ok(Json(value))
}

fn metric_value(
    engine: &Engine,
    kind: &str,
    n: usize,
    opts: AnalyticsOptions,
) -> crate::Result<Value> {
    use nepkit_core::metrics;
    if !matches!(
        kind,
        "pn" | "ap" | "rsl" | "durations" | "correlations" | "stats"
    ) {
        return Err(Error::not_found("metric", kind));
    }
    let data = engine.analytics_snapshot()?;
    let value = match kind {
        "pn" => json!({ "n": n, "issues": analytics::issue_precisions(&data.reports, n)? }),
        "ap" => json!(metrics::ap_at_n(&data.reports, n, opts.min_presorted)?),
        "rsl" => json!({
            "average": metrics::avg_rsl(&data.reports, opts.min_presorted)?,
            "issues": analytics::issue_rsls(&data.reports)?,
        }),
        "durations" => {
            let sessions = analytics::editing_sessions(&data.reports, opts.threshold_minutes);
            let minutes: Vec<f64> = sessions.iter().map(|s| s.duration_minutes).collect();
            json!({
                "threshold_minutes": opts.threshold_minutes,
                "sessions": sessions.len(),
                "valid_fraction": metrics::valid_fraction(&minutes, opts.threshold_minutes).ok(),
                "histogram": metrics::duration_histogram(minutes, opts.chunk_minutes)?,
            })
        }
        "correlations" => json!(data.correlations(opts.threshold_minutes)?),
        _ => json!(data.statistics()),
    };
    Ok(value)
}

/// A running server. Dropping the handle does not stop it; call
/// [`ServiceHandle::shutdown`].
pub struct ServiceHandle {
    pub local_addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    task: JoinHandle<std::io::Result<()>>,
}

impl ServiceHandle {
    /// Stops accepting connections and waits for in-flight requests.
    pub async fn shutdown(mut self) -> std::io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.task.await.map_err(std::io::Error::other)?
    }

    /// Waits until the server exits on its own.
    pub async fn wait(self) -> std::io::Result<()> {
        self.task.await.map_err(std::io::Error::other)?
    }
}

/// Validates the configuration, opens the data directory and starts
/// listening.
pub async fn serve(config: ServiceConfig) -> crate::Result<ServiceHandle> {
    config.validate()?;
    let engine = Engine::open(
        &config.data_root,
        EngineOptions {
            report_code_pattern: config.report_code_pattern.clone(),
            ..EngineOptions::default()
        },
    )?;
    serve_engine(Arc::new(engine), config).await
}

pub async fn serve_engine(
    engine: Arc<Engine>,
    config: ServiceConfig,
) -> crate::Result<ServiceHandle> {
    let address = config.listen_address;
    let listener = TcpListener::bind(address)
        .await
        .map_err(|source| Error::Bind {
            address: address.to_string(),
            source,
        })?;
    let local_addr = listener.local_addr().map_err(|source| Error::Bind {
        address: address.to_string(),
        source,
    })?;
    let app = router(engine, config);
    let (tx, rx) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });
    Ok(ServiceHandle {
        local_addr,
        shutdown: Some(tx),
        task,
    })
}
