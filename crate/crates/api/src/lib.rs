//! HTTP service over a [`Catalog`]: search, metrics, visualization payloads
//! and record lookup under `/v1`, guarded by bearer tokens with a
//! fixed-window rate limit per token.

pub mod auth;
pub mod config;
pub mod error;

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use adsk_core::corpus::Record;
use adsk_core::exec::ExecError;
use adsk_core::metrics::compute_metrics;
use adsk_core::vis::{default_stopwords, paper_network, word_cloud};
use adsk_core::{parse, Catalog, ExecConfig, IndexError, QueryNode, ScoredDoc};
use axum::body::Bytes;
use axum::extract::rejection::{BytesRejection, PathRejection, QueryRejection};
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderValue, Method, Uri};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::auth::{Admission, Gatekeeper, Principal};
use crate::config::{ApiConfig, ConfigError};
pub use crate::error::{ApiError, ErrorBody};

pub const RATE_LIMIT_HEADER: &str = "x-ratelimit-remaining";
pub const DEFAULT_FIELDS: &[&str] = &["bibcode", "title", "authors", "year"];
pub const KNOWN_FIELDS: &[&str] = &[
    "bibcode",
    "title",
    "authors",
    "year",
    "abstract",
    "body",
    "references",
    "citation_count",
    "read_count",
];

pub struct AppState {
    pub catalog: Catalog,
    pub exec: ExecConfig,
    gate: Gatekeeper,
    stopwords: BTreeSet<String>,
    handled: AtomicU64,
}

impl AppState {
    pub fn new(catalog: Catalog, config: &ApiConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(Self::with_gatekeeper(
            catalog,
            config.exec_config()?,
            Gatekeeper::new(&config.tokens),
        ))
    }

    pub fn with_gatekeeper(catalog: Catalog, exec: ExecConfig, gate: Gatekeeper) -> Self {
        AppState {
            catalog,
            exec,
            gate,
            stopwords: default_stopwords(),
            handled: AtomicU64::new(0),
        }
    }

    /// Requests that reached an endpoint handler.
    pub fn handled_requests(&self) -> u64 {
        self.handled.load(Ordering::SeqCst)
    }

    fn enter(&self) {
        self.handled.fetch_add(1, Ordering::SeqCst);
    }

    fn run(&self, node: &QueryNode) -> Result<Vec<ScoredDoc>, ApiError> {
        self.catalog
            .executor(&self.exec)
            .search_all(node)
            .map_err(exec_error)
    }
}

type Shared = Arc<AppState>;

pub fn router(state: Shared) -> Router {
    let v1 = Router::new()
        .route("/search", get(search))
        .route("/metrics", post(metrics))
        .route("/vis/paper-network", post(vis_network))
        .route("/vis/word-cloud", post(vis_word_cloud))
        .route("/record/{bibcode}", get(record))
        .route_layer(middleware::from_fn_with_state(state.clone(), authorize))
        .method_not_allowed_fallback(wrong_method);
    Router::new()
        .nest("/v1", v1)
        .fallback(unrouted)
        .layer(middleware::from_fn(log_request))
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, state: Shared) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

async fn log_request(req: Request, next: Next) -> Response {
    let started = Instant::now();
    let method = req.method().clone();
    let path = req.uri().path().to_string();
    let response = next.run(req).await;
    let principal = response
        .extensions()
        .get::<Principal>()
        .map_or("-", |p| p.client_name.as_str());
    tracing::info!(
        "{method} {path} {} {principal} {}ms",
        response.status().as_u16(),
        started.elapsed().as_millis()
    );
    response
}

async fn authorize(State(state): State<Shared>, mut req: Request, next: Next) -> Response {
    let header = req
        .headers()
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok());
    let Some(token) = state.gate.authenticate(header) else {
        let mut resp = ApiError::unauthorized().into_response();
        resp.headers_mut()
            .insert(header::WWW_AUTHENTICATE, HeaderValue::from_static("Bearer"));
        return resp;
    };
    let principal = Principal {
        client_name: token.client_name.clone(),
    };
    let (mut resp, remaining) = match state.gate.admit(token) {
        Admission::Limited => (ApiError::rate_limited().into_response(), 0),
        Admission::Allowed { remaining } => {
            req.extensions_mut().insert(principal.clone());
            (next.run(req).await, remaining)
        }
    };
    resp.headers_mut()
        .insert(RATE_LIMIT_HEADER, HeaderValue::from(remaining));
    resp.extensions_mut().insert(principal);
    resp
}

async fn unrouted(uri: Uri) -> ApiError {
    let first = uri
        .path()
        .trim_start_matches('/')
        .split('/')
        .next()
        .unwrap_or("");
    let versioned = first
        .strip_prefix('v')
        .is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()));
    if versioned && first != "v1" {
        ApiError::not_found(
            "unknown_api_version",
            format!("API version `{first}` does not exist; use /v1"),
        )
    } else {
        ApiError::not_found("not_found", format!("no endpoint at {}", uri.path()))
    }
}

async fn wrong_method(method: Method, uri: Uri) -> ApiError {
    ApiError::not_found(
        "not_found",
        format!("no {method} endpoint at {}", uri.path()),
    )
}

fn exec_error(e: ExecError) -> ApiError {
    match e {
        ExecError::RowsOutOfRange { .. } => {
            ApiError::bad_request("rows_out_of_range", e.to_string())
        }
        ExecError::Index(IndexError::InvalidPattern(_)) => {
            ApiError::unprocessable("invalid_pattern", e.to_string())
        }
        ExecError::Index(_) => ApiError::unprocessable("invalid_query", e.to_string()),
        ExecError::InvalidConfig(_) => ApiError::internal(e.to_string()),
    }
}

fn json_body<T: DeserializeOwned>(body: Result<Bytes, BytesRejection>) -> Result<T, ApiError> {
    let bytes = body.map_err(|e| ApiError::bad_request("malformed_body", e.body_text()))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| ApiError::bad_request("malformed_body", format!("request body: {e}")))
}

fn parse_query(q: &str) -> Result<QueryNode, ApiError> {
    Ok(parse(q)?)
}

#[derive(Debug, Default)]
struct SearchParams {
    q: Option<String>,
    rows: Option<String>,
    start: Option<String>,
    fl: Option<String>,
}

async fn search(
    State(state): State<Shared>,
    params: Result<Query<Vec<(String, String)>>, QueryRejection>,
) -> Result<Json<Value>, ApiError> {
    state.enter();
    let Query(pairs) = params.map_err(|e| ApiError::bad_request("bad_parameter", e.body_text()))?;
    let mut p = SearchParams::default();
    for (k, v) in pairs {
        let slot = match k.as_str() {
            "q" => &mut p.q,
            "rows" => &mut p.rows,
            "start" => &mut p.start,
            "fl" => &mut p.fl,
            _ => continue,
        };
        *slot = Some(v);
    }
    let q = p.q.as_deref().map(str::trim).unwrap_or("");
    if q.is_empty() {
        return Err(ApiError::bad_request(
            "missing_query",
            "parameter `q` is required",
        ));
    }
    let rows = match p.rows.as_deref() {
        None => state.exec.default_rows,
        Some(r) => r.parse::<usize>().map_err(|_| {
            ApiError::bad_request("bad_parameter", format!("rows `{r}` is not a count"))
        })?,
    };
    if rows > state.exec.max_rows {
        return Err(ApiError::bad_request(
            "rows_out_of_range",
            format!("rows {rows} exceeds the maximum of {}", state.exec.max_rows),
        ));
    }
    let start = match p.start.as_deref() {
        None => 0,
        Some(s) => {
            let n = s.parse::<i64>().map_err(|_| {
                ApiError::bad_request("bad_parameter", format!("start `{s}` is not an integer"))
            })?;
            usize::try_from(n).map_err(|_| {
                ApiError::bad_request("paging_out_of_range", "start must not be negative")
            })?
        }
    };
    let fields: Vec<String> = match p.fl.as_deref() {
        None => DEFAULT_FIELDS.iter().map(|s| s.to_string()).collect(),
        Some(fl) => {
            let fields: Vec<String> = fl
                .split(',')
                .map(|f| f.trim().to_string())
                .filter(|f| !f.is_empty())
                .collect();
            if let Some(bad) = fields.iter().find(|f| !KNOWN_FIELDS.contains(&f.as_str())) {
                return Err(ApiError::bad_request(
                    "bad_parameter",
                    format!("unknown field `{bad}` in fl"),
                ));
            }
            fields
        }
    };
    let node = parse_query(q)?;
    let page = state
        .catalog
        .executor(&state.exec)
        .execute(&node, rows, start)
        .map_err(exec_error)?;
    let docs: Vec<Value> = page
        .docs
        .iter()
        .map(|d| doc_json(&state, d, &fields))
        .collect();
    Ok(Json(json!({
        "response": {
            "numFound": page.num_found,
            "start": page.start,
            "docs": docs,
        }
    })))
}

fn doc_json(state: &AppState, doc: &ScoredDoc, fields: &[String]) -> Value {
    let mut out = Map::new();
    out.insert("bibcode".into(), json!(doc.bibcode));
    out.insert("score".into(), json!(doc.score));
    let record = state.catalog.corpus.get(&doc.bibcode);
    let graphs = &state.catalog.graphs;
    for f in fields {
        let value = match (f.as_str(), record) {
            ("bibcode", _) => continue,
            ("citation_count", _) => json!(graphs.citations.cited_by(&doc.bibcode).len()),
            ("read_count", _) => json!(graphs.readership.readers_of(&doc.bibcode).len()),
            (_, None) => continue,
            ("title", Some(r)) => json!(r.title),
            ("authors", Some(r)) => json!(r.authors),
            ("year", Some(r)) => json!(r.year),
            ("abstract", Some(r)) => json!(r.abstract_text),
            ("body", Some(r)) => json!(r.body),
            ("references", Some(r)) => json!(r.references),
            _ => continue,
        };
        out.insert(f.clone(), value);
    }
    Value::Object(out)
}

#[derive(Deserialize)]
struct MetricsRequest {
    bibcodes: Vec<String>,
}

async fn metrics(
    State(state): State<Shared>,
    body: Result<Bytes, BytesRejection>,
) -> Result<Response, ApiError> {
    state.enter();
    let req: MetricsRequest = json_body(body)?;
    if req.bibcodes.is_empty() {
        return Err(ApiError::unprocessable(
            "empty_bibcodes",
            "`bibcodes` must not be empty",
        ));
    }
    Ok(Json(compute_metrics(&state.catalog.graphs, &req.bibcodes)).into_response())
}

#[derive(Deserialize)]
struct NetworkRequest {
    bibcodes: Option<Vec<String>>,
    q: Option<String>,
}

async fn vis_network(
    State(state): State<Shared>,
    body: Result<Bytes, BytesRejection>,
) -> Result<Response, ApiError> {
    state.enter();
    let req: NetworkRequest = json_body(body)?;
    let bibcodes = match (req.bibcodes, req.q) {
        (Some(b), None) => b,
        (None, Some(q)) => {
            let mut docs = state.run(&parse_query(&q)?)?;
            if let Some(k) = state.exec.inner_top_k {
                docs.truncate(k);
            }
            docs.into_iter().map(|d| d.bibcode).collect()
        }
        _ => {
            return Err(ApiError::bad_request(
                "bad_request",
                "give exactly one of `bibcodes` or `q`",
            ))
        }
    };
    if bibcodes.is_empty() {
        return Err(ApiError::unprocessable(
            "empty_bibcodes",
            "no papers to connect",
        ));
    }
    Ok(Json(paper_network(&state.catalog.graphs, &bibcodes)).into_response())
}

#[derive(Deserialize)]
struct WordCloudRequest {
    q: Option<String>,
}

async fn vis_word_cloud(
    State(state): State<Shared>,
    body: Result<Bytes, BytesRejection>,
) -> Result<Response, ApiError> {
    state.enter();
    let req: WordCloudRequest = json_body(body)?;
    let q = req.q.as_deref().map(str::trim).unwrap_or("");
    if q.is_empty() {
        return Err(ApiError::bad_request("missing_query", "`q` is required"));
    }
    let docs = state.run(&parse_query(q)?)?;
    let index = &state.catalog.index;
    let ids: Vec<_> = docs
        .iter()
        .filter_map(|d| index.doc_id(&d.bibcode))
        .collect();
    Ok(Json(word_cloud(index, &ids, &state.stopwords)).into_response())
}

#[derive(Serialize)]
struct RecordView<'a> {
    #[serde(flatten)]
    record: &'a Record,
    citation_count: usize,
    read_count: usize,
}

async fn record(
    State(state): State<Shared>,
    path: Result<Path<String>, PathRejection>,
) -> Result<Response, ApiError> {
    state.enter();
    let Path(bibcode) = path.map_err(|e| ApiError::bad_request("bad_parameter", e.body_text()))?;
    let record = state
        .catalog
        .corpus
        .get(&bibcode)
        .ok_or_else(|| ApiError::not_found("not_found", format!("no record `{bibcode}`")))?;
    let graphs = &state.catalog.graphs;
    Ok(Json(RecordView {
        record,
        citation_count: graphs.citations.cited_by(&bibcode).len(),
        read_count: graphs.readership.readers_of(&bibcode).len(),
    })
    .into_response())
}
