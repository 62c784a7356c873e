use std::fs;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::{ChatMessage, LlmConfig, LlmError};

pub trait Transport: Send + Sync {
    fn send(&self, messages: &[ChatMessage]) -> Result<String, LlmError>;
}

/// Hex SHA-256 of the compact JSON encoding of `messages`.
pub fn replay_key(messages: &[ChatMessage]) -> String {
    let canonical = serde_json::to_vec(messages).expect("messages serialize");
    hex::encode(Sha256::digest(&canonical))
}

pub struct ReplayTransport {
    dir: PathBuf,
}

impl ReplayTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReplayTransport { dir: dir.into() }
    }
}

impl Transport for ReplayTransport {
    fn send(&self, messages: &[ChatMessage]) -> Result<String, LlmError> {
        let hash = replay_key(messages);
        let path = self.dir.join(format!("{hash}.txt"));
        fs::read_to_string(&path).map_err(|_| LlmError::ReplayMiss {
            hash,
            dir: self.dir.clone(),
        })
    }
}

/// Forwards to an inner transport and stores every reply as a replay file.
pub struct RecordingTransport<T> {
    inner: T,
    dir: PathBuf,
}

impl<T: Transport> RecordingTransport<T> {
    pub fn new(inner: T, dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(RecordingTransport { inner, dir })
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn send(&self, messages: &[ChatMessage]) -> Result<String, LlmError> {
        let reply = self.inner.send(messages)?;
        let path = self.dir.join(format!("{}.txt", replay_key(messages)));
        fs::write(&path, &reply)
            .map_err(|e| LlmError::TransportError(format!("recording {}: {e}", path.display())))?;
        Ok(reply)
    }
}

/// Transport backed by a closure; used for scripted conversations.
pub struct FnTransport<F>(F);

impl<F> FnTransport<F>
where
    F: Fn(&[ChatMessage]) -> Result<String, LlmError> + Send + Sync,
{
    pub fn new(f: F) -> Self {
        FnTransport(f)
    }
}

impl<F> Transport for FnTransport<F>
where
    F: Fn(&[ChatMessage]) -> Result<String, LlmError> + Send + Sync,
{
    fn send(&self, messages: &[ChatMessage]) -> Result<String, LlmError> {
        (self.0)(messages)
    }
}

/// OpenAI-compatible `POST {model, messages, temperature}` client.
pub struct LiveTransport {
    client: reqwest::blocking::Client,
    url: String,
    model: String,
    api_key: Option<String>,
    temperature: f64,
    max_retries: u32,
    backoff: Duration,
}

impl LiveTransport {
    pub fn from_config(config: &LlmConfig) -> Result<Self, LlmError> {
        let api_key =
            match &config.api_key_env {
                Some(var) => Some(std::env::var(var).map_err(|_| {
                    LlmError::Config(format!("environment variable {var} is not set"))
                })?),
                None => None,
            };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| LlmError::TransportError(e.to_string()))?;
        Ok(LiveTransport {
            client,
            url: config.endpoint_url.clone(),
            model: config.model_name.clone(),
            api_key,
            temperature: config.temperature,
            max_retries: config.max_retries,
            backoff: Duration::from_millis(500),
        })
    }

    /// Base delay of the exponential backoff (doubled after each retry).
    pub fn with_backoff(mut self, base: Duration) -> Self {
        self.backoff = base;
        self
    }

    fn request_body(&self, messages: &[ChatMessage]) -> Value {
        json!({
            "model": self.model,
            "messages": messages,
            "temperature": self.temperature,
        })
    }
}

impl Transport for LiveTransport {
    fn send(&self, messages: &[ChatMessage]) -> Result<String, LlmError> {
        let body = self.request_body(messages);
        let mut attempt = 0;
        loop {
            let mut req = self.client.post(&self.url).json(&body);
            if let Some(key) = &self.api_key {
                req = req.bearer_auth(key);
            }
            let resp = req
                .send()
                .map_err(|e| LlmError::TransportError(e.to_string()))?;
            let status = resp.status();
            if status.is_success() {
                let v: Value = resp
                    .json()
                    .map_err(|e| LlmError::MalformedResponse(e.to_string()))?;
                return first_choice(&v);
            }
            let retryable = status.as_u16() == 429 || status.is_server_error();
            if !retryable {
                let text = resp.text().unwrap_or_default();
                return Err(LlmError::TransportError(format!("{status}: {text}")));
            }
            if attempt >= self.max_retries {
                return Err(if status.as_u16() == 429 {
                    LlmError::RateLimited {
                        attempts: attempt + 1,
                    }
                } else {
                    LlmError::TransportError(format!("{status} after {} attempts", attempt + 1))
                });
            }
            let delay = retry_after(&resp).unwrap_or(self.backoff * 2u32.pow(attempt.min(16)));
            log::warn!("{status} from {}, retrying in {delay:?}", self.url);
            thread::sleep(delay);
            attempt += 1;
        }
    }
}

fn retry_after(resp: &reqwest::blocking::Response) -> Option<Duration> {
    let secs: u64 = resp
        .headers()
        .get(reqwest::header::RETRY_AFTER)?
        .to_str()
        .ok()?
        .trim()
        .parse()
        .ok()?;
    Some(Duration::from_secs(secs.min(60)))
}

fn first_choice(v: &Value) -> Result<String, LlmError> {
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| {
            LlmError::MalformedResponse("missing choices[0].message.content".to_string())
        })
}

/// Stores `reply` as the replay answer for `messages`.
pub fn write_replay(dir: &Path, messages: &[ChatMessage], reply: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{}.txt", replay_key(messages))), reply)
}
