//! Chat-completion client with a content-addressed response cache.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use epimark_core::extract::MarkerModel;
use epimark_core::prompt::render_prompt;
use epimark_core::{PromptMode, QaItem, ResponseRecord};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::jsonl::write_json;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClientConfig {
    /// Base URL of an OpenAI-compatible API, or the full
    /// `/chat/completions` URL.
    pub endpoint_url: String,
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub max_inflight: usize,
    pub requests_per_minute: Option<u32>,
    /// Retries after the first attempt.
    pub max_retries: u32,
    pub backoff_ms: u64,
    pub backoff_cap_ms: u64,
    pub timeout_secs: u64,
    /// Environment variable holding the API key.
    pub api_key_env: String,
}

impl Default for ClientConfig {
    fn default() -> Self {
        Self {
            endpoint_url: "https://api.openai.com/v1".into(),
            model_id: String::new(),
            temperature: 0.5,
            max_tokens: 128,
            max_inflight: 4,
            requests_per_minute: None,
            max_retries: 5,
            backoff_ms: 500,
            backoff_cap_ms: 30_000,
            timeout_secs: 60,
            api_key_env: "OPENAI_API_KEY".into(),
        }
    }
}

impl ClientConfig {
    pub fn chat_url(&self) -> String {
        let base = self.endpoint_url.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(format!("temperature {} outside [0, 2]", self.temperature));
        }
        if self.max_tokens == 0 || self.max_inflight == 0 {
            return Err("max_tokens and max_inflight must be positive".into());
        }
        if self.model_id.is_empty() {
            return Err("model_id is empty".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElicitationRequest {
    pub item: QaItem,
    pub prompt_mode: PromptMode,
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl ElicitationRequest {
    pub fn prompt(&self) -> String {
        render_prompt(&self.item, self.prompt_mode)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CachedCompletion {
    pub cache_key: String,
    pub model_id: String,
    pub prompt: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub raw_response: String,
    /// Whatever the endpoint reported besides the text (id, usage, ...).
    pub endpoint_metadata: String,
}

/// SHA-256 over the length-prefixed request fields, hex encoded.
pub fn cache_key(model_id: &str, prompt: &str, temperature: f64, max_tokens: u32) -> String {
    let mut h = Sha256::new();
    for field in [model_id.as_bytes(), prompt.as_bytes()] {
        h.update((field.len() as u64).to_le_bytes());
        h.update(field);
    }
    h.update(temperature.to_bits().to_le_bytes());
    h.update(max_tokens.to_le_bytes());
    hex::encode(h.finalize())
}

/// Completions stored as one JSON file per key, sharded by key prefix.
#[derive(Debug, Clone)]
pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, key: &str) -> PathBuf {
        self.root.join(&key[..2]).join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Option<CachedCompletion> {
        let path = self.path(key);
        let text = fs::read_to_string(&path).ok()?;
        match serde_json::from_str::<CachedCompletion>(&text) {
            Ok(c) if c.cache_key == key => Some(c),
            _ => {
                log::warn!("ignoring corrupt cache entry {}", path.display());
                None
            }
        }
    }

    pub fn put(&self, entry: &CachedCompletion) -> crate::Result<()> {
        write_json(&self.path(&entry.cache_key), entry)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpReply {
    pub status: u16,
    pub body: String,
}

/// Posts a JSON body; `Err` means no HTTP status was received.
pub trait Transport: Send + Sync {
    fn post_json(&self, url: &str, api_key: &str, body: &Value) -> Result<HttpReply, String>;
}

pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new(timeout: Duration) -> Result<Self, ElicitError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ElicitError::Transport(e.to_string()))?;
        Ok(Self { client })
    }
}

impl Transport for ReqwestTransport {
    fn post_json(&self, url: &str, api_key: &str, body: &Value) -> Result<HttpReply, String> {
        let resp = self
            .client
            .post(url)
            .bearer_auth(api_key)
            .json(body)
            .send()
            .map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp.text().map_err(|e| e.to_string())?;
        Ok(HttpReply { status, body })
    }
}

/// Refuses every request; for replaying a run from its cache alone.
pub struct OfflineTransport;

impl Transport for OfflineTransport {
    fn post_json(&self, url: &str, _: &str, _: &Value) -> Result<HttpReply, String> {
        Err(format!("offline: refusing request to {url}"))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ElicitError {
    #[error("no API key: environment variable {0} is unset or empty")]
    MissingCredential(String),
    #[error("authentication failed (HTTP {status}): {body}")]
    Auth { status: u16, body: String },
    #[error("gave up after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("unexpected endpoint response: {0}")]
    Schema(String),
    #[error("request rejected (HTTP {status}): {body}")]
    Rejected { status: u16, body: String },
    #[error("cache miss for {0} while offline")]
    Offline(String),
    #[error("transport setup failed: {0}")]
    Transport(String),
    #[error("invalid client configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Cache(#[from] crate::Error),
}

/// Text and metadata from a chat-completion body.
pub fn parse_chat_response(body: &str) -> Result<(String, String), ElicitError> {
    let v: Value = serde_json::from_str(body).map_err(|e| ElicitError::Schema(format!("not JSON: {e}")))?;
    let text = v
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| ElicitError::Schema("missing choices[0].message.content".into()))?;
    let meta = json!({
        "id": v.get("id"),
        "model": v.get("model"),
        "usage": v.get("usage"),
        "finish_reason": v.pointer("/choices/0/finish_reason"),
    });
    Ok((text.to_string(), meta.to_string()))
}

struct RateLimiter {
    interval: Option<Duration>,
    next: Mutex<Option<Instant>>,
}

impl RateLimiter {
    fn new(per_minute: Option<u32>) -> Self {
        Self {
            interval: per_minute.filter(|&n| n > 0).map(|n| Duration::from_secs(60) / n),
            next: Mutex::new(None),
        }
    }

    fn acquire(&self) {
        let Some(interval) = self.interval else { return };
        let wait = {
            let mut next = self.next.lock().unwrap_or_else(|e| e.into_inner());
            let now = Instant::now();
            let slot = next.map_or(now, |n| n.max(now));
            *next = Some(slot + interval);
            slot - now
        };
        std::thread::sleep(wait);
    }
}

/// Sends prompts through the cache, then the transport. Safe to share
/// between threads.
pub struct Client<T> {
    config: ClientConfig,
    cache: Option<Cache>,
    transport: T,
    api_key: Option<String>,
    limiter: RateLimiter,
    network_calls: AtomicU64,
}

impl<T: Transport> Client<T> {
    /// Reads the API key from the configured environment variable.
    pub fn new(config: ClientConfig, cache: Option<Cache>, transport: T) -> Self {
        let api_key = std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty());
        Self::with_api_key(config, cache, transport, api_key)
    }

    pub fn with_api_key(config: ClientConfig, cache: Option<Cache>, transport: T, api_key: Option<String>) -> Self {
        Self {
            limiter: RateLimiter::new(config.requests_per_minute),
            config,
            cache,
            transport,
            api_key,
            network_calls: AtomicU64::new(0),
        }
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    /// HTTP attempts made so far, retries included.
    pub fn network_calls(&self) -> u64 {
        self.network_calls.load(Ordering::Relaxed)
    }

    pub fn complete(&self, request: &ElicitationRequest) -> Result<String, ElicitError> {
        self.complete_prompt(&request.model_id, &request.prompt(), request.temperature, request.max_tokens)
    }

    pub fn complete_prompt(&self, model_id: &str, prompt: &str, temperature: f64, max_tokens: u32) -> Result<String, ElicitError> {
        let key = cache_key(model_id, prompt, temperature, max_tokens);
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(&key)) {
            return Ok(hit.raw_response);
        }
        let api_key = self
            .api_key
            .as_deref()
            .ok_or_else(|| ElicitError::MissingCredential(self.config.api_key_env.clone()))?;
        let body = json!({
            "model": model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
            "max_tokens": max_tokens,
        });
        let (raw_response, endpoint_metadata) = self.send(api_key, &body)?;
        if let Some(cache) = &self.cache {
            cache.put(&CachedCompletion {
                cache_key: key,
                model_id: model_id.to_string(),
                prompt: prompt.to_string(),
                temperature,
                max_tokens,
                raw_response: raw_response.clone(),
                endpoint_metadata,
            })?;
        }
        Ok(raw_response)
    }

    fn backoff(&self, retry: u32) -> Duration {
        let ms = self
            .config
            .backoff_ms
            .saturating_mul(1u64 << retry.min(20))
            .min(self.config.backoff_cap_ms);
        Duration::from_millis(ms)
    }

    fn send(&self, api_key: &str, body: &Value) -> Result<(String, String), ElicitError> {
        let url = self.config.chat_url();
        let attempts = self.config.max_retries + 1;
        let mut last = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(self.backoff(attempt - 1));
            }
            self.limiter.acquire();
            self.network_calls.fetch_add(1, Ordering::Relaxed);
            match self.transport.post_json(&url, api_key, body) {
                Ok(HttpReply { status: 200..=299, body }) => return parse_chat_response(&body),
                Ok(HttpReply { status: status @ (401 | 403), body }) => return Err(ElicitError::Auth { status, body }),
                Ok(HttpReply { status, body }) if status == 429 || status >= 500 => {
                    last = format!("HTTP {status}: {body}");
                }
                Ok(HttpReply { status, body }) => return Err(ElicitError::Rejected { status, body }),
                Err(e) => last = e,
            }
            log::debug!("attempt {} of {attempts} failed: {last}", attempt + 1);
        }
        Err(ElicitError::RetriesExhausted { attempts, last })
    }

    /// One raw record per item, in input order, using up to `max_inflight`
    /// worker threads. Stops at the first error.
    pub fn generate(&self, items: &[QaItem], mode: PromptMode) -> Result<Vec<ResponseRecord>, ElicitError> {
        self.config.validate().map_err(ElicitError::Config)?;
        let next = AtomicUsize::new(0);
        let failed = AtomicBool::new(false);
        let slots: Vec<Mutex<Option<Result<String, ElicitError>>>> = items.iter().map(|_| Mutex::new(None)).collect();
        let workers = self.config.max_inflight.min(items.len()).max(1);
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= items.len() || failed.load(Ordering::Relaxed) {
                        break;
                    }
                    let request = ElicitationRequest {
                        item: items[i].clone(),
                        prompt_mode: mode,
                        model_id: self.config.model_id.clone(),
                        temperature: self.config.temperature,
                        max_tokens: self.config.max_tokens,
                    };
                    let out = self.complete(&request);
                    if out.is_err() {
                        failed.store(true, Ordering::Relaxed);
                    }
                    *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(out);
                });
            }
        });
        let mut records = Vec::with_capacity(items.len());
        for (item, slot) in items.iter().zip(slots) {
            match slot.into_inner().unwrap_or_else(|e| e.into_inner()) {
                Some(Ok(raw)) => records.push(ResponseRecord::raw(item, &self.config.model_id, mode, raw, self.config.temperature)),
                Some(Err(e)) => return Err(e),
                None => {}
            }
        }
        Ok(records)
    }
}

/// Asks an endpoint model to name the marker in a response. Deterministic
/// decoding keeps replays stable.
pub struct EndpointExtractor<'a, T> {
    pub client: &'a Client<T>,
    pub model_id: String,
    pub max_tokens: u32,
}

impl<'a, T: Transport> EndpointExtractor<'a, T> {
    pub fn new(client: &'a Client<T>, model_id: impl Into<String>) -> Self {
        Self {
            client,
            model_id: model_id.into(),
            max_tokens: 16,
        }
    }
}

impl<T: Transport> MarkerModel for EndpointExtractor<'_, T> {
    type Error = ElicitError;

    fn complete(&mut self, prompt: &str) -> Result<String, ElicitError> {
        self.client.complete_prompt(&self.model_id, prompt, 0.0, self.max_tokens)
    }
}
