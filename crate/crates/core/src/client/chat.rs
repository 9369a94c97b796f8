use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::retry::{BackoffPolicy, InFlightLimiter, Sleeper, ThreadSleeper};
use super::transport::Transport;
use super::wire::{ChatRequest, ChatResponse, Usage};
use super::ClientError;
use crate::prompt::{PromptBundle, POINTS_HEADER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClientConfig {
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub max_in_flight: usize,
    pub backoff: BackoffPolicy,
}

impl Default for ClientConfig {
    fn default() -> Self {
        Self {
            model: "gpt-4o".into(),
            temperature: 0.0,
            max_tokens: 1024,
            max_in_flight: 2,
            backoff: BackoffPolicy::default(),
        }
    }
}

/// One line of the request transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub scene_id: String,
    pub request_hash: String,
    pub response_text: Option<String>,
    pub error: Option<String>,
    pub latency: f64,
    pub usage: Usage,
    pub attempts: u32,
}

/// Sends each bundle as its own single-turn request with retries and a
/// bound on concurrent requests. Safe to share across threads.
pub struct ChatClient {
    transport: Box<dyn Transport>,
    config: ClientConfig,
    sleeper: Arc<dyn Sleeper>,
    limiter: InFlightLimiter,
    log: Mutex<Vec<(TranscriptEntry, ChatRequest)>>,
}

impl ChatClient {
    pub fn new(transport: Box<dyn Transport>, config: ClientConfig) -> Self {
        Self::with_sleeper(transport, config, Arc::new(ThreadSleeper))
    }

    pub fn with_sleeper(
        transport: Box<dyn Transport>,
        config: ClientConfig,
        sleeper: Arc<dyn Sleeper>,
    ) -> Self {
        Self {
            limiter: InFlightLimiter::new(config.max_in_flight),
            transport,
            config,
            sleeper,
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    pub fn peak_in_flight(&self) -> usize {
        self.limiter.peak()
    }

    pub fn send(&self, bundle: &PromptBundle) -> Result<ChatResponse, ClientError> {
        let c = &self.config;
        let request = ChatRequest::from_bundle(bundle, &c.model, c.temperature, c.max_tokens);
        let t0 = Instant::now();
        let attempts_allowed = c.backoff.max_attempts.max(1);
        let mut last = None;
        let mut attempts = 0;
        for attempt in 0..attempts_allowed {
            if attempt > 0 {
                self.sleeper.sleep(c.backoff.delay(attempt - 1));
            }
            attempts += 1;
            let result = {
                let _slot = self.limiter.acquire();
                self.transport.send(bundle, &request)
            };
            match result {
                Ok(resp) => {
                    self.record(bundle, &request, Ok(&resp), attempts, t0);
                    return Ok(resp);
                }
                Err(e) if e.is_retryable() => {
                    log::warn!("scene {}: attempt {} failed: {e}", bundle.scene_id, attempts);
                    last = Some(e);
                }
                Err(e) => {
                    self.record(bundle, &request, Err(&e), attempts, t0);
                    return Err(e);
                }
            }
        }
        let err = ClientError::GiveUp {
            attempts,
            last: last.map(|e| e.to_string()).unwrap_or_default(),
        };
        self.record(bundle, &request, Err(&err), attempts, t0);
        Err(err)
    }

    fn record(
        &self,
        bundle: &PromptBundle,
        request: &ChatRequest,
        outcome: Result<&ChatResponse, &ClientError>,
        attempts: u32,
        t0: Instant,
    ) {
        let entry = TranscriptEntry {
            scene_id: bundle.scene_id.clone(),
            request_hash: request.hash(),
            response_text: outcome.ok().map(|r| r.text.clone()),
            error: outcome.err().map(|e| e.to_string()),
            latency: outcome.map_or_else(|_| t0.elapsed().as_secs_f64(), |r| r.latency),
            usage: outcome.map(|r| r.usage).unwrap_or_default(),
            attempts,
        };
        self.log.lock().unwrap().push((entry, request.clone()));
    }

    pub fn transcript(&self) -> Vec<TranscriptEntry> {
        self.log.lock().unwrap().iter().map(|(e, _)| e.clone()).collect()
    }

    /// Every request sent, with the scene it belongs to.
    pub fn requests(&self) -> Vec<(String, ChatRequest)> {
        self.log
            .lock()
            .unwrap()
            .iter()
            .map(|(e, r)| (e.scene_id.clone(), r.clone()))
            .collect()
    }
}

pub fn write_transcript(entries: &[TranscriptEntry], path: &Path) -> Result<(), ClientError> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    for e in entries {
        serde_json::to_writer(&mut f, e)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_transcript(path: &Path) -> Result<Vec<TranscriptEntry>, ClientError> {
    fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(ClientError::from))
        .collect()
}

fn digest(bytes: &[u8]) -> [u8; 32] {
    Sha256::digest(bytes).into()
}

/// Checks that every request is a single user message and that no
/// scene-specific payload (image or points block) appears in requests of
/// more than one scene. Returns one message per violation.
pub fn audit_isolation(requests: &[(String, ChatRequest)]) -> Vec<String> {
    let mut violations = Vec::new();
    let mut owner: BTreeMap<[u8; 32], &str> = BTreeMap::new();
    for (scene, req) in requests {
        if req.messages.len() != 1 || req.messages[0].role != "user" {
            violations.push(format!(
                "scene {scene}: request carries {} messages",
                req.messages.len()
            ));
        }
        let payloads = req.image_payloads().into_iter().map(|p| digest(&p)).chain(
            req.texts()
                .into_iter()
                .filter(|t| t.starts_with(POINTS_HEADER))
                .map(|t| digest(t.as_bytes())),
        );
        for d in payloads {
            match owner.get(&d) {
                Some(other) if *other != scene.as_str() => violations.push(format!(
                    "scene {scene}: payload also sent for scene {other}"
                )),
                _ => {
                    owner.insert(d, scene);
                }
            }
        }
    }
    violations
}
