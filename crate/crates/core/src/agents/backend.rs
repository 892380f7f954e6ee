use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("API key environment variable {0} is not set")]
    MissingApiKey(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("unexpected response: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompletionRequest<'a> {
    pub prompt: &'a str,
    pub temperature: f64,
    pub max_tokens: u32,
}

/// A text-completion service. Implementations must be usable from several
/// threads at once.
pub trait LlmBackend: Send + Sync {
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, BackendError>;
    fn name(&self) -> &str;
    fn model_id(&self) -> &str;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpSettings {
    pub base_url: String,
    pub model: String,
    pub api_key_env: String,
    pub timeout_s: u64,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
}

impl Default for HttpSettings {
    fn default() -> Self {
        HttpSettings {
            base_url: "https://api.openai.com/v1".into(),
            model: "gpt-4o".into(),
            api_key_env: "LLM_API_KEY".into(),
            timeout_s: 60,
            max_retries: 4,
            backoff_base_ms: 1000,
        }
    }
}

/// OpenAI-compatible chat-completions client.
pub struct HttpBackend {
    settings: HttpSettings,
    api_key: String,
    agent: ureq::Agent,
}

impl HttpBackend {
    /// Reads the API key from the configured environment variable.
    pub fn from_env(settings: HttpSettings) -> Result<Self, BackendError> {
        let api_key = std::env::var(&settings.api_key_env)
            .ok()
            .filter(|k| !k.is_empty())
            .ok_or_else(|| BackendError::MissingApiKey(settings.api_key_env.clone()))?;
        Ok(Self::with_key(settings, api_key))
    }

    pub fn with_key(settings: HttpSettings, api_key: String) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(settings.timeout_s)))
            .http_status_as_error(false)
            .build()
            .into();
        HttpBackend {
            settings,
            api_key,
            agent,
        }
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.settings.base_url.trim_end_matches('/'))
    }

    fn request_once(&self, body: &serde_json::Value) -> Result<String, BackendError> {
        let mut resp = self
            .agent
            .post(&self.endpoint())
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(body)
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(BackendError::Status { status, body: text });
        }
        extract_content(&text)
    }
}

/// Pulls `choices[0].message.content` out of a chat-completions response.
pub fn extract_content(body: &str) -> Result<String, BackendError> {
    let v: serde_json::Value = serde_json::from_str(body).map_err(|e| BackendError::Protocol(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(str::to_string)
        .ok_or_else(|| BackendError::Protocol("missing choices[0].message.content".into()))
}

fn retryable(e: &BackendError) -> bool {
    matches!(e, BackendError::Status { status, .. } if *status == 429 || *status >= 500)
}

impl LlmBackend for HttpBackend {
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, BackendError> {
        let body = serde_json::json!({
            "model": self.settings.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        });
        let mut attempt = 0;
        loop {
            match self.request_once(&body) {
                Err(e) if retryable(&e) && attempt < self.settings.max_retries => {
                    let wait = self.settings.backoff_base_ms.saturating_mul(1 << attempt.min(16));
                    log::warn!("{e}; retrying in {wait} ms");
                    std::thread::sleep(Duration::from_millis(wait));
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    fn name(&self) -> &str {
        "http"
    }

    fn model_id(&self) -> &str {
        &self.settings.model
    }
}
