//! Bearer-token lookup and the fixed-window rate limiter.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::config::ApiToken;

pub const WINDOW: Duration = Duration::from_secs(60);

/// The authenticated caller, attached to the request and its response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Principal {
    pub client_name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    Allowed { remaining: u32 },
    Limited,
}

struct Window {
    opened: Instant,
    count: u32,
}

/// Token table plus per-token request counts for the current window.
pub struct Gatekeeper {
    tokens: HashMap<String, ApiToken>,
    window: Duration,
    counts: Mutex<HashMap<String, Window>>,
}

impl Gatekeeper {
    pub fn new(tokens: &[ApiToken]) -> Self {
        Self::with_window(tokens, WINDOW)
    }

    pub fn with_window(tokens: &[ApiToken], window: Duration) -> Self {
        Gatekeeper {
            tokens: tokens
                .iter()
                .map(|t| (t.token.clone(), t.clone()))
                .collect(),
            window,
            counts: Mutex::new(HashMap::new()),
        }
    }

    /// Token from an `Authorization` header value, if it is a known bearer token.
    pub fn authenticate(&self, header: Option<&str>) -> Option<&ApiToken> {
        let token = header?.strip_prefix("Bearer ")?.trim();
        if token.is_empty() {
            return None;
        }
        self.tokens.get(token)
    }

    /// Counts one request against the token's window.
    pub fn admit(&self, token: &ApiToken) -> Admission {
        self.admit_at(token, Instant::now())
    }

    fn admit_at(&self, token: &ApiToken, now: Instant) -> Admission {
        let mut counts = self.counts.lock().unwrap_or_else(|e| e.into_inner());
        let w = counts.entry(token.token.clone()).or_insert(Window {
            opened: now,
            count: 0,
        });
        if now.duration_since(w.opened) >= self.window {
            w.opened = now;
            w.count = 0;
        }
        w.count = w.count.saturating_add(1);
        if w.count > token.rate_limit {
            Admission::Limited
        } else {
            Admission::Allowed {
                remaining: token.rate_limit - w.count,
            }
        }
    }
}
