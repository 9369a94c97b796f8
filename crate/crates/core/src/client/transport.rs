use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use serde::Deserialize;

use super::wire::{ChatRequest, ChatResponse, Usage};
use super::ClientError;
use crate::prompt::PromptBundle;

/// Delivers one request. Implementations must not keep conversation state
/// between calls.
pub trait Transport: Send + Sync {
    fn send(&self, bundle: &PromptBundle, request: &ChatRequest) -> Result<ChatResponse, ClientError>;
}

static HTTP_TRANSPORTS: AtomicUsize = AtomicUsize::new(0);

/// Number of network transports constructed in this process.
pub fn http_transports_created() -> usize {
    HTTP_TRANSPORTS.load(Ordering::SeqCst)
}

/// Chat-completions endpoint over HTTPS.
pub struct HttpTransport {
    url: String,
    api_key: String,
    headers: BTreeMap<String, String>,
    http: reqwest::blocking::Client,
}

impl HttpTransport {
    /// Reads the API key from the environment variable `api_key_env`.
    pub fn new(
        url: &str,
        api_key_env: &str,
        headers: BTreeMap<String, String>,
        timeout: Duration,
    ) -> Result<Self, ClientError> {
        let api_key = std::env::var(api_key_env)
            .map_err(|_| ClientError::Auth(format!("environment variable {api_key_env} is not set")))?;
        let http = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        HTTP_TRANSPORTS.fetch_add(1, Ordering::SeqCst);
        Ok(Self {
            url: url.to_string(),
            api_key,
            headers,
            http,
        })
    }
}

#[derive(Deserialize)]
struct WireReply {
    #[serde(default)]
    model: String,
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Usage,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    content: serde_json::Value,
}

/// Message content is either a string or a list of text parts.
fn content_text(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Array(parts) => Some(
            parts
                .iter()
                .filter_map(|p| p.get("text").and_then(|t| t.as_str()))
                .collect::<Vec<_>>()
                .join(""),
        ),
        _ => None,
    }
}

/// Maps a reply body to a response, classifying HTTP failures.
pub fn classify_reply(status: u16, body: &str, latency: f64) -> Result<ChatResponse, ClientError> {
    match status {
        200..=299 => {
            let reply: WireReply = serde_json::from_str(body)
                .map_err(|e| ClientError::MalformedResponse(e.to_string()))?;
            let text = reply
                .choices
                .first()
                .and_then(|c| content_text(&c.message.content))
                .ok_or_else(|| ClientError::MalformedResponse("reply has no text".into()))?;
            Ok(ChatResponse {
                text,
                model: reply.model,
                usage: reply.usage,
                latency,
            })
        }
        401 | 403 => Err(ClientError::Auth(format!("HTTP {status}"))),
        429 => Err(ClientError::RateLimited(format!("HTTP {status}"))),
        408 | 500..=599 => Err(ClientError::Transport(format!("HTTP {status}"))),
        _ => Err(ClientError::BadRequest {
            status,
            body: body.chars().take(500).collect(),
        }),
    }
}

impl Transport for HttpTransport {
    fn send(&self, _bundle: &PromptBundle, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        let t0 = Instant::now();
        let mut req = self.http.post(&self.url).bearer_auth(&self.api_key).json(request);
        for (k, v) in &self.headers {
            req = req.header(k, v);
        }
        let resp = req.send().map_err(|e| ClientError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp.text().map_err(|e| ClientError::Transport(e.to_string()))?;
        classify_reply(status, &body, t0.elapsed().as_secs_f64())
    }
}
