//! Chat-completion gateway: prompt rendering, transports and call accounting.

mod ledger;
mod prompts;
mod ratelimit;
mod transport;

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use ledger::{LedgerEntry, LedgerTotals, RunLedger};
pub use prompts::{
    json_example, program_system_prompt, render_feedback_prompt, render_ie_prompt,
    render_program_prompts, PromptError,
};
pub use ratelimit::TokenBucket;
pub use transport::{
    replay_key, write_replay, FnTransport, LiveTransport, RecordingTransport, ReplayTransport,
    Transport,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TransportConfig {
    Live,
    Replay { directory: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmConfig {
    #[serde(default)]
    pub endpoint_url: String,
    pub model_name: String,
    /// Name of the environment variable holding the API key.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default)]
    pub requests_per_minute: Option<u32>,
    pub transport: TransportConfig,
}

fn default_retries() -> u32 {
    3
}

fn default_timeout() -> u64 {
    120
}

impl LlmConfig {
    pub fn replay(model_name: &str, directory: impl Into<PathBuf>) -> Self {
        LlmConfig {
            endpoint_url: String::new(),
            model_name: model_name.to_string(),
            api_key_env: None,
            temperature: 0.0,
            max_retries: default_retries(),
            timeout_secs: default_timeout(),
            requests_per_minute: None,
            transport: TransportConfig::Replay {
                directory: directory.into(),
            },
        }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if !(self.temperature >= 0.0) {
            return Err(LlmError::Config(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if matches!(self.transport, TransportConfig::Live) && self.endpoint_url.is_empty() {
            return Err(LlmError::Config("live transport needs endpoint_url".into()));
        }
        Ok(())
    }
}

#[derive(thiserror::Error, Debug)]
pub enum LlmError {
    #[error("invalid llm config: {0}")]
    Config(String),
    #[error("transport error: {0}")]
    TransportError(String),
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("no replay response {hash}.txt in {}", dir.display())]
    ReplayMiss { hash: String, dir: PathBuf },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("empty message content at index {0}")]
    EmptyMessage(usize),
}

/// A transport plus optional rate limiting and call accounting.
///
/// Cheap to clone and safe to share across threads.
#[derive(Clone)]
pub struct Gateway {
    transport: Arc<dyn Transport>,
    limiter: Option<Arc<TokenBucket>>,
    ledger: Option<Arc<RunLedger>>,
    model: String,
}

impl Gateway {
    pub fn new(transport: Arc<dyn Transport>, model: impl Into<String>) -> Self {
        Gateway {
            transport,
            limiter: None,
            ledger: None,
            model: model.into(),
        }
    }

    pub fn from_config(config: &LlmConfig) -> Result<Self, LlmError> {
        config.validate()?;
        let transport: Arc<dyn Transport> = match &config.transport {
            TransportConfig::Live => Arc::new(LiveTransport::from_config(config)?),
            TransportConfig::Replay { directory } => Arc::new(ReplayTransport::new(directory)),
        };
        let mut gw = Gateway::new(transport, &config.model_name);
        if let Some(rpm) = config.requests_per_minute {
            gw = gw.with_limiter(Arc::new(TokenBucket::per_minute(rpm)));
        }
        Ok(gw)
    }

    pub fn with_limiter(mut self, limiter: Arc<TokenBucket>) -> Self {
        self.limiter = Some(limiter);
        self
    }

    pub fn with_ledger(mut self, ledger: Arc<RunLedger>) -> Self {
        self.ledger = Some(ledger);
        self
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    /// Sends `messages` and returns the assistant text. `label` names the call
    /// in the run ledger (e.g. `ie/0003` or `program/price/1`).
    pub fn complete(&self, label: &str, messages: &[ChatMessage]) -> Result<String, LlmError> {
        if let Some(i) = messages.iter().position(|m| m.content.is_empty()) {
            return Err(LlmError::EmptyMessage(i));
        }
        if let Some(l) = &self.limiter {
            l.acquire();
        }
        let reply = self.transport.send(messages)?;
        if let Some(ledger) = &self.ledger {
            ledger.record(label, &self.model, messages, &reply);
        }
        Ok(reply)
    }
}

/// One-shot completion without rate limiting or accounting.
pub fn complete(config: &LlmConfig, messages: &[ChatMessage]) -> Result<String, LlmError> {
    Gateway::from_config(config)?.complete("complete", messages)
}
