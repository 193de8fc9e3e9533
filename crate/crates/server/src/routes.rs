use std::collections::HashMap;
use std::io::Cursor;
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use embias::debias::DebiasMetadata;
use embias::json::to_stable_json;
use embias::metrics::{EvaluateOptions, DEFAULT_PERMUTATIONS, DEFAULT_SEED};
use embias::store::{parse_binary, read_text, vectors_bytes, vocab_json, write_text};
use embias::{builtin_spec, compose, evaluate, parse_spec, project_spec, BiasSpecification, DebiasMethod, Metric};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{ApiError, ApiResult};
use crate::jobs::JobKind;
use crate::registry::SpaceHandle;
use crate::AppState;

type Shared = Arc<AppState>;

pub fn router(state: Shared) -> Router {
    let upload_cap = state.config.upload_cap;
    Router::new()
        .route(
            "/api/spaces",
            get(list_spaces).post(upload_space).layer(DefaultBodyLimit::max(upload_cap)),
        )
        .route("/api/spaces/{id}", get(get_space))
        .route("/api/spaces/{id}/vectors", get(get_vectors))
        .route("/api/spaces/{id}/export", get(export_space))
        .route("/api/specs", get(list_specs))
        .route("/api/evaluate", post(evaluate_route))
        .route("/api/debias", post(debias_route))
        .route("/api/visualize", post(visualize_route))
        .route("/api/jobs/{id}", get(get_job))
        .route("/api/jobs/{id}/result", get(get_job_result))
        .route("/api/openapi", get(openapi))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .method_not_allowed_fallback(|| async {
            ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed on this route")
        })
        .with_state(state)
}

pub(crate) fn json_response<T: Serialize + ?Sized>(status: StatusCode, value: &T) -> Response {
    match to_stable_json(value) {
        Ok(text) => (status, [(header::CONTENT_TYPE, "application/json")], text).into_response(),
        Err(e) => {
            tracing::error!(%e, "serialization failure");
            (StatusCode::INTERNAL_SERVER_ERROR, "serialization failure").into_response()
        }
    }
}

fn ok<T: Serialize>(value: &T) -> Response {
    json_response(StatusCode::OK, value)
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("invalid_request", format!("request body: {e}")))
}

/// Runs blocking engine work on the bounded worker pool.
async fn compute<T, F>(state: &Shared, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce() -> ApiResult<T> + Send + 'static,
{
    let _permit = state
        .pool
        .acquire()
        .await
        .map_err(|_| ApiError::internal("worker pool closed"))?;
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

/// Accepts a builtin spec name or an inline specification object.
fn resolve_spec(value: &Value) -> ApiResult<BiasSpecification> {
    match value {
        Value::String(name) => builtin_spec(name)
            .ok_or_else(|| ApiError::bad_request("invalid_spec", format!("unknown builtin specification {name:?}"))),
        Value::Object(_) => Ok(parse_spec(&value.to_string())?),
        _ => Err(ApiError::bad_request(
            "invalid_spec",
            "spec must be a builtin name or a specification object",
        )),
    }
}

async fn list_spaces(State(state): State<Shared>) -> Response {
    ok(&state.registry.list())
}

async fn get_space(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(ok(&state.registry.handle(&id)?))
}

fn multipart_error(e: axum::extract::multipart::MultipartError) -> ApiError {
    if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
        ApiError::too_large("upload exceeds the configured size limit")
    } else {
        ApiError::bad_request("invalid_upload", e.body_text())
    }
}

/// Multipart upload. Either a `file` part in text format, or `vocab` and
/// `vectors` parts in binary format. An optional `name` part names the space.
async fn upload_space(State(state): State<Shared>, mut multipart: Multipart) -> ApiResult<Response> {
    let mut name: Option<String> = None;
    let mut parts: HashMap<String, (Option<String>, Bytes)> = HashMap::new();
    while let Some(field) = multipart.next_field().await.map_err(multipart_error)? {
        let key = field.name().unwrap_or_default().to_string();
        let file_name = field.file_name().map(str::to_string);
        let data = field.bytes().await.map_err(multipart_error)?;
        if key == "name" {
            name = Some(String::from_utf8_lossy(&data).trim().to_string());
        } else {
            parts.insert(key, (file_name, data));
        }
    }
    let stem = |f: &Option<String>| {
        f.as_deref()
            .and_then(|f| std::path::Path::new(f).file_stem())
            .map(|s| s.to_string_lossy().into_owned())
    };

    let state2 = state.clone();
    let handle = compute(&state, move || {
        let space = if let Some((file_name, data)) = parts.remove("file") {
            let name = name.or_else(|| stem(&file_name)).unwrap_or_else(|| "uploaded".into());
            let source = file_name.unwrap_or_else(|| "upload".into());
            read_text(Cursor::new(data), &name, &source, None)?
        } else if let (Some((vocab_name, vocab)), Some((_, vectors))) = (parts.remove("vocab"), parts.remove("vectors")) {
            let name = name.or_else(|| stem(&vocab_name)).unwrap_or_else(|| "uploaded".into());
            parse_binary(&name, &vocab, &vectors)?
        } else {
            return Err(ApiError::bad_request(
                "invalid_upload",
                "expected a 'file' part (text) or 'vocab' and 'vectors' parts (binary)",
            ));
        };
        if space.is_empty() {
            return Err(ApiError::bad_request("invalid_upload", "upload contains no vectors"));
        }
        state2.registry.insert(space)
    })
    .await?;
    Ok(json_response(StatusCode::CREATED, &handle))
}

async fn get_vectors(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Query(query): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let words = query
        .get("words")
        .ok_or_else(|| ApiError::bad_request("invalid_request", "missing 'words' query parameter"))?
        .clone();
    let state2 = state.clone();
    let results = compute(&state, move || {
        let space = state2.registry.space(&id)?;
        Ok(words
            .split(',')
            .map(str::trim)
            .filter(|w| !w.is_empty())
            .map(|w| space.lookup(w))
            .collect::<Vec<_>>())
    })
    .await?;
    Ok(ok(&results))
}

/// `format=text` (default) or `format=binary` with `part=vectors` (default) or `part=vocab`.
async fn export_space(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Query(query): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let format = query.get("format").map_or("text", String::as_str).to_string();
    let part = query.get("part").map_or("vectors", String::as_str).to_string();
    let state2 = state.clone();
    compute(&state, move || {
        let space = state2.registry.space(&id)?;
        let (bytes, content_type, ext) = match (format.as_str(), part.as_str()) {
            ("text", _) => {
                let mut buf = Vec::new();
                write_text(&space, &mut buf)?;
                (buf, "text/plain; charset=utf-8", "vec")
            }
            ("binary", "vectors") => (vectors_bytes(&space), "application/octet-stream", "vectors"),
            ("binary", "vocab") => (vocab_json(&space)?, "application/json", "vocab"),
            ("binary", other) => {
                return Err(ApiError::bad_request("invalid_request", format!("unknown part {other:?}")))
            }
            (other, _) => return Err(ApiError::bad_request("invalid_request", format!("unknown format {other:?}"))),
        };
        Ok(Response::builder()
            .header(header::CONTENT_TYPE, content_type)
            .header(
                header::CONTENT_DISPOSITION,
                format!("attachment; filename=\"{}.{ext}\"", space.name()),
            )
            .body(Body::from(bytes))
            .expect("static headers are valid"))
    })
    .await
}

async fn list_specs() -> Response {
    let summaries: Vec<_> = embias::builtin_specs().iter().map(BiasSpecification::summary).collect();
    ok(&summaries)
}

#[derive(Deserialize, Default)]
#[serde(default)]
struct Options {
    seed: Option<u64>,
    n_permutations: Option<usize>,
}

#[derive(Deserialize)]
struct EvaluateRequest {
    space_id: String,
    spec: Value,
    #[serde(default)]
    metrics: Option<Vec<String>>,
    #[serde(default)]
    options: Options,
    #[serde(default, rename = "async")]
    run_async: bool,
}

async fn evaluate_route(State(state): State<Shared>, body: Bytes) -> ApiResult<Response> {
    let req: EvaluateRequest = parse_body(&body)?;
    let spec = resolve_spec(&req.spec)?;
    let metrics = match &req.metrics {
        Some(list) => Metric::parse_list(&list.join(","))?,
        None => Metric::defaults_for(&spec),
    };
    let options = EvaluateOptions {
        seed: req.options.seed.unwrap_or(DEFAULT_SEED),
        n_permutations: req.options.n_permutations.unwrap_or(DEFAULT_PERMUTATIONS),
        sq_datasets: state.sq_datasets.clone(),
        ..Default::default()
    };
    // surface spec/metric incompatibility before touching the space
    if let Some(m) = metrics.iter().find(|m| m.requires_explicit() && !spec.is_explicit()) {
        return Err(embias::Error::IncompatibleMetric { metric: m.to_string() }.into());
    }
    state.registry.handle(&req.space_id)?;

    let state2 = state.clone();
    let work = move || -> ApiResult<String> {
        let space = state2.registry.space(&req.space_id)?;
        let report = evaluate(&space, &spec, &metrics, &options)?;
        to_stable_json(&report).map_err(|e| ApiError::internal(e.to_string()))
    };

    if req.run_async {
        let job = state.jobs.create(JobKind::Evaluate);
        let id = job.id.clone();
        let state3 = state.clone();
        tokio::spawn(async move {
            let state4 = state3.clone();
            let id2 = id.clone();
            let outcome = compute(&state3, move || {
                state4.jobs.start(&id2);
                work()
            })
            .await;
            match outcome {
                Ok(text) => state3.jobs.finish(&id, format!("/api/jobs/{id}/result"), Some(text)),
                Err(e) => state3.jobs.fail(&id, e.message),
            }
        });
        return Ok(json_response(StatusCode::ACCEPTED, &job));
    }
    let text = compute(&state, work).await?;
    Ok(([(header::CONTENT_TYPE, "application/json")], text).into_response())
}

#[derive(Deserialize, Clone, Copy, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
enum ReturnMode {
    #[default]
    Handle,
    Download,
}

#[derive(Deserialize)]
struct DebiasRequest {
    space_id: String,
    spec: Value,
    method: String,
    #[serde(default, rename = "return")]
    return_mode: ReturnMode,
}

#[derive(Serialize)]
struct DebiasResponse {
    space: SpaceHandle,
    metadata: DebiasMetadata,
}

async fn debias_route(State(state): State<Shared>, body: Bytes) -> ApiResult<Response> {
    let req: DebiasRequest = parse_body(&body)?;
    let spec = resolve_spec(&req.spec)?;
    let sequence = DebiasMethod::parse_sequence(&req.method)?;
    let source = state.registry.handle(&req.space_id)?;

    if req.return_mode == ReturnMode::Download {
        let state2 = state.clone();
        return compute(&state, move || {
            let space = state2.registry.space(&req.space_id)?;
            let result = compose(&space, &spec, &sequence)?;
            let mut buf = Vec::new();
            write_text(&result.space, &mut buf)?;
            let meta = serde_json::to_string(&result.metadata()).map_err(|e| ApiError::internal(e.to_string()))?;
            Ok(Response::builder()
                .header(header::CONTENT_TYPE, "text/plain; charset=utf-8")
                .header(
                    header::CONTENT_DISPOSITION,
                    format!("attachment; filename=\"{}.vec\"", result.space.name()),
                )
                .header("x-debias-metadata", meta)
                .body(Body::from(buf))
                .expect("header values are ascii json"))
        })
        .await;
    }

    let state2 = state.clone();
    let work = move || -> ApiResult<DebiasResponse> {
        let space = state2.registry.space(&req.space_id)?;
        let result = compose(&space, &spec, &sequence)?;
        let metadata = result.metadata();
        let handle = state2.registry.insert(result.space)?;
        Ok(DebiasResponse { space: handle, metadata })
    };

    if source.vocab_size > state.config.async_rows {
        let job = state.jobs.create(JobKind::Debias);
        let id = job.id.clone();
        let state3 = state.clone();
        tokio::spawn(async move {
            let state4 = state3.clone();
            let id2 = id.clone();
            let outcome = compute(&state3, move || {
                state4.jobs.start(&id2);
                work()
            })
            .await;
            match outcome.and_then(|r| {
                let text = to_stable_json(&r).map_err(|e| ApiError::internal(e.to_string()))?;
                Ok((r.space.id, text))
            }) {
                Ok((space_id, text)) => state3.jobs.finish(&id, space_id, Some(text)),
                Err(e) => state3.jobs.fail(&id, e.message),
            }
        });
        return Ok(json_response(StatusCode::ACCEPTED, &job));
    }
    let response = compute(&state, work).await?;
    Ok(json_response(StatusCode::CREATED, &response))
}

#[derive(Deserialize)]
struct VisualizeRequest {
    space_id: String,
    #[serde(default)]
    debiased_space_id: Option<String>,
    spec: Value,
}

async fn visualize_route(State(state): State<Shared>, body: Bytes) -> ApiResult<Response> {
    let req: VisualizeRequest = parse_body(&body)?;
    let spec = resolve_spec(&req.spec)?;
    state.registry.handle(&req.space_id)?;
    if let Some(id) = &req.debiased_space_id {
        state.registry.handle(id)?;
    }
    let state2 = state.clone();
    let view = compute(&state, move || {
        let mut spaces = vec![state2.registry.space(&req.space_id)?];
        if let Some(id) = &req.debiased_space_id {
            spaces.push(state2.registry.space(id)?);
        }
        let refs: Vec<_> = spaces.iter().map(|s| s.as_ref()).collect();
        project_spec(&refs, &spec).map_err(|e| match e {
            embias::Error::EmptyAfterFilter { .. } => ApiError::bad_request(
                "empty_set",
                "none of the specification terms is in the vocabulary",
            ),
            other => other.into(),
        })
    })
    .await?;
    Ok(ok(&view))
}

async fn get_job(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    let job = state.jobs.get(&id).ok_or_else(|| ApiError::not_found("job", &id))?;
    Ok(ok(&job))
}

async fn get_job_result(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    state.jobs.get(&id).ok_or_else(|| ApiError::not_found("job", &id))?;
    let body = state
        .jobs
        .body(&id)
        .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "not_ready", "job has no result yet"))?;
    Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
}

async fn openapi() -> Response {
    ok(&crate::openapi::document())
}
