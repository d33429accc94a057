#![allow(dead_code)]

use std::sync::Arc;
use std::time::Duration;

use adsk_api::auth::Gatekeeper;
use adsk_api::config::ApiToken;
use adsk_api::{router, AppState, ErrorBody};
use adsk_core::corpus::desk6;
use adsk_core::{Catalog, ExecConfig};
use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub const TOKEN: &str = "test-token-0123456789abcdef0123456789";

pub struct Harness {
    pub state: Arc<AppState>,
    pub app: Router,
}

pub struct Reply {
    pub status: StatusCode,
    pub remaining: Option<u32>,
    pub content_type: Option<String>,
    pub json: Value,
}

impl Reply {
    pub fn error(&self) -> ErrorBody {
        serde_json::from_value(self.json.clone()).expect("error body")
    }
}

pub fn harness_with(catalog: Catalog, limit: u32, window: Duration) -> Harness {
    let tokens = [ApiToken {
        token: TOKEN.into(),
        client_name: "tests".into(),
        rate_limit: limit,
    }];
    let state = Arc::new(AppState::with_gatekeeper(
        catalog,
        ExecConfig::default(),
        Gatekeeper::with_window(&tokens, window),
    ));
    Harness {
        app: router(state.clone()),
        state,
    }
}

pub fn harness() -> Harness {
    harness_with(Catalog::build(desk6()), 10_000, Duration::from_secs(60))
}

pub fn encode(q: &str) -> String {
    let mut out = String::new();
    for b in q.bytes() {
        if b.is_ascii_alphanumeric() || b"-_.".contains(&b) {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

impl Harness {
    pub async fn send(
        &self,
        method: Method,
        uri: &str,
        token: Option<&str>,
        body: Option<&str>,
    ) -> Reply {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        let req = match body {
            Some(b) => req
                .header("content-type", "application/json")
                .body(Body::from(b.to_string())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let remaining = resp
            .headers()
            .get("x-ratelimit-remaining")
            .map(|v| v.to_str().unwrap().parse().unwrap());
        let content_type = resp
            .headers()
            .get("content-type")
            .map(|v| v.to_str().unwrap().to_string());
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let json = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
        Reply {
            status,
            remaining,
            content_type,
            json,
        }
    }

    pub async fn get(&self, uri: &str) -> Reply {
        self.send(Method::GET, uri, Some(TOKEN), None).await
    }

    pub async fn post(&self, uri: &str, body: &str) -> Reply {
        self.send(Method::POST, uri, Some(TOKEN), Some(body)).await
    }

    pub async fn search(&self, q: &str) -> Reply {
        self.get(&format!("/v1/search?q={}", encode(q))).await
    }
}

pub fn bibcodes(reply: &Reply) -> Vec<String> {
    reply.json["response"]["docs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["bibcode"].as_str().unwrap().to_string())
        .collect()
}
