//! Chat-completions client with per-scene isolation, retries and a bound on
//! concurrent requests, plus a seeded offline oracle for tests.

mod chat;
mod mock;
mod planner;
mod retry;
mod transport;
mod wire;

pub use chat::{
    audit_isolation, read_transcript, write_transcript, ChatClient, ClientConfig, TranscriptEntry,
};
pub use mock::{format_coord, mock_oracle, MockTransport, OracleConfig, FAILURE_TEXT, MOCK_MODEL};
pub use planner::{plan_route, GRID_RESOLUTION_M};
pub use retry::{BackoffPolicy, InFlightGuard, InFlightLimiter, RecordingSleeper, Sleeper, ThreadSleeper};
pub use transport::{classify_reply, http_transports_created, HttpTransport, Transport};
pub use wire::{ChatMessage, ChatRequest, ChatResponse, ContentPart, ImageUrl, Usage};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited: {0}")]
    RateLimited(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("request rejected with HTTP {status}: {body}")]
    BadRequest { status: u16, body: String },
    #[error("gave up after {attempts} attempts: {last}")]
    GiveUp { attempts: u32, last: String },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("unknown task: {0}")]
    UnknownTask(String),
    #[error("no ground truth for scene {0:?}")]
    UnknownScene(String),
    #[error("invalid client config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl ClientError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, Self::RateLimited(_) | Self::Transport(_))
    }
}
