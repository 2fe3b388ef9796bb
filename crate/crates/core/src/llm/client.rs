//! Provider chat clients over an abstract HTTP transport, with retries,
//! exponential backoff and a shared per-provider rate limiter.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use base64::Engine;
use serde_json::{json, Value};

use super::{Agent, AgentConfig, AgentSummary, ChatMessage, LlmError, Provider, Role};

#[derive(Clone, Debug, PartialEq)]
pub struct HttpRequest {
    pub url: String,
    pub headers: Vec<(String, String)>,
    pub body: Value,
    pub timeout: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransportError {
    Timeout,
    Connection(String),
}

pub trait Transport: Send + Sync {
    fn post(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError>;
}

#[cfg(feature = "http")]
pub fn default_transport() -> Result<Arc<dyn Transport>, LlmError> {
    Ok(Arc::new(super::http::ReqwestTransport::new()?))
}

#[cfg(not(feature = "http"))]
pub fn default_transport() -> Result<Arc<dyn Transport>, LlmError> {
    Err(LlmError::Transport("built without the `http` feature".into()))
}

/// Delay before retry `attempt` (0-based) is `base * 2^attempt`, capped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Backoff {
    pub base: Duration,
    pub max: Duration,
}

impl Default for Backoff {
    fn default() -> Self {
        Self { base: Duration::from_millis(500), max: Duration::from_secs(16) }
    }
}

impl Backoff {
    pub fn none() -> Self {
        Self { base: Duration::ZERO, max: Duration::ZERO }
    }

    pub fn delay(&self, attempt: u32) -> Duration {
        self.base.saturating_mul(1u32 << attempt.min(16)).min(self.max)
    }
}

/// Token bucket refilled continuously at `rate_per_minute`.
#[derive(Debug)]
pub struct RateLimiter {
    rate_per_minute: u32,
    state: Mutex<(f64, Instant)>,
}

impl RateLimiter {
    pub fn new(rate_per_minute: u32) -> Self {
        let burst = rate_per_minute.max(1) as f64;
        Self { rate_per_minute: rate_per_minute.max(1), state: Mutex::new((burst, Instant::now())) }
    }

    /// Blocks until a token is available.
    pub fn acquire(&self) {
        let per_sec = self.rate_per_minute as f64 / 60.0;
        loop {
            let wait = {
                let mut guard = self.state.lock().unwrap_or_else(|e| e.into_inner());
                let (tokens, last) = &mut *guard;
                let now = Instant::now();
                *tokens = (*tokens + now.duration_since(*last).as_secs_f64() * per_sec)
                    .min(self.rate_per_minute as f64);
                *last = now;
                if *tokens >= 1.0 {
                    *tokens -= 1.0;
                    return;
                }
                (1.0 - *tokens) / per_sec
            };
            std::thread::sleep(Duration::from_secs_f64(wait));
        }
    }
}

/// The process-wide limiter for a provider at a given rate.
pub fn shared_limiter(provider: Provider, rate_per_minute: u32) -> Arc<RateLimiter> {
    static LIMITERS: OnceLock<Mutex<HashMap<(Provider, u32), Arc<RateLimiter>>>> = OnceLock::new();
    let map = LIMITERS.get_or_init(Default::default);
    let mut map = map.lock().unwrap_or_else(|e| e.into_inner());
    map.entry((provider, rate_per_minute))
        .or_insert_with(|| Arc::new(RateLimiter::new(rate_per_minute)))
        .clone()
}

fn base64_png(bytes: &[u8]) -> String {
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

fn default_base_url(provider: Provider) -> &'static str {
    match provider {
        Provider::Gemini => "https://generativelanguage.googleapis.com",
        Provider::Gpt4o => "https://api.openai.com",
        Provider::Claude => "https://api.anthropic.com",
        Provider::Scripted => "",
    }
}

fn role_name(role: Role) -> &'static str {
    match role {
        Role::System => "system",
        Role::User => "user",
        Role::Assistant => "assistant",
    }
}

fn openai_request(config: &AgentConfig, base: &str, key: &str, messages: &[ChatMessage]) -> HttpRequest {
    let msgs: Vec<Value> = messages
        .iter()
        .map(|m| match &m.image {
            Some(img) => json!({
                "role": role_name(m.role),
                "content": [
                    {"type": "text", "text": m.text},
                    {"type": "image_url", "image_url": {"url": format!("data:image/png;base64,{}", base64_png(&img.pixels))}},
                ],
            }),
            None => json!({"role": role_name(m.role), "content": m.text}),
        })
        .collect();
    let mut body = json!({"model": config.model_id, "messages": msgs});
    if let Some(t) = config.temperature {
        body["temperature"] = json!(t);
    }
    HttpRequest {
        url: format!("{base}/v1/chat/completions"),
        headers: vec![("Authorization".into(), format!("Bearer {key}"))],
        body,
        timeout: config.timeout,
    }
}

fn anthropic_request(config: &AgentConfig, base: &str, key: &str, messages: &[ChatMessage]) -> HttpRequest {
    let system: Vec<&str> = messages.iter().filter(|m| m.role == Role::System).map(|m| m.text.as_str()).collect();
    let msgs: Vec<Value> = messages
        .iter()
        .filter(|m| m.role != Role::System)
        .map(|m| {
            let mut content = vec![json!({"type": "text", "text": m.text})];
            if let Some(img) = &m.image {
                content.push(json!({
                    "type": "image",
                    "source": {"type": "base64", "media_type": "image/png", "data": base64_png(&img.pixels)},
                }));
            }
            json!({"role": role_name(m.role), "content": content})
        })
        .collect();
    let mut body = json!({"model": config.model_id, "max_tokens": 4096, "messages": msgs});
    if !system.is_empty() {
        body["system"] = json!(system.join("\n\n"));
    }
    if let Some(t) = config.temperature {
        body["temperature"] = json!(t);
    }
    HttpRequest {
        url: format!("{base}/v1/messages"),
        headers: vec![
            ("x-api-key".into(), key.to_string()),
            ("anthropic-version".into(), "2023-06-01".into()),
        ],
        body,
        timeout: config.timeout,
    }
}

fn gemini_request(config: &AgentConfig, base: &str, key: &str, messages: &[ChatMessage]) -> HttpRequest {
    let system: Vec<Value> = messages
        .iter()
        .filter(|m| m.role == Role::System)
        .map(|m| json!({"text": m.text}))
        .collect();
    let contents: Vec<Value> = messages
        .iter()
        .filter(|m| m.role != Role::System)
        .map(|m| {
            let mut parts = vec![json!({"text": m.text})];
            if let Some(img) = &m.image {
                parts.push(json!({"inline_data": {"mime_type": "image/png", "data": base64_png(&img.pixels)}}));
            }
            let role = if m.role == Role::Assistant { "model" } else { "user" };
            json!({"role": role, "parts": parts})
        })
        .collect();
    let mut body = json!({"contents": contents});
    if !system.is_empty() {
        body["systemInstruction"] = json!({"parts": system});
    }
    if let Some(t) = config.temperature {
        body["generationConfig"] = json!({"temperature": t});
    }
    HttpRequest {
        url: format!("{base}/v1beta/models/{}:generateContent?key={key}", config.model_id),
        headers: vec![],
        body,
        timeout: config.timeout,
    }
}

/// Provider-specific request for `messages`.
pub fn build_request(config: &AgentConfig, key: &str, messages: &[ChatMessage]) -> HttpRequest {
    let base = config
        .base_url
        .as_deref()
        .unwrap_or(default_base_url(config.provider))
        .trim_end_matches('/');
    match config.provider {
        Provider::Gpt4o => openai_request(config, base, key, messages),
        Provider::Claude => anthropic_request(config, base, key, messages),
        Provider::Gemini | Provider::Scripted => gemini_request(config, base, key, messages),
    }
}

fn excerpt(body: &str) -> String {
    body.chars().take(300).collect()
}

/// Assistant text from a successful provider response body.
pub fn extract_text(provider: Provider, body: &str) -> Result<String, LlmError> {
    let bad = || LlmError::ProviderError { status: 200, body: excerpt(body) };
    let v: Value = serde_json::from_str(body).map_err(|_| bad())?;
    let text = match provider {
        Provider::Gpt4o => v["choices"][0]["message"]["content"].as_str().map(str::to_string),
        Provider::Claude => v["content"].as_array().map(|blocks| {
            blocks
                .iter()
                .filter(|b| b["type"] == "text")
                .filter_map(|b| b["text"].as_str())
                .collect::<String>()
        }),
        Provider::Gemini | Provider::Scripted => v["candidates"][0]["content"]["parts"].as_array().map(|parts| {
            parts.iter().filter_map(|p| p["text"].as_str()).collect::<String>()
        }),
    };
    text.ok_or_else(bad)
}

pub struct ChatClient {
    config: AgentConfig,
    transport: Arc<dyn Transport>,
    api_key: String,
    limiter: Option<Arc<RateLimiter>>,
    backoff: Backoff,
}

impl ChatClient {
    /// Reads the provider key through `lookup` (normally the process env).
    pub fn new(
        config: AgentConfig,
        transport: Arc<dyn Transport>,
        lookup: impl Fn(&str) -> Option<String>,
    ) -> Result<Self, LlmError> {
        config
            .validate()
            .map_err(|body| LlmError::ProviderError { status: 0, body })?;
        let var = config
            .provider
            .credential_var()
            .ok_or_else(|| LlmError::Script("scripted agents do not use a chat client".into()))?;
        let api_key = lookup(var)
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| LlmError::AuthError(format!("{var} is not set")))?;
        let limiter = config.requests_per_minute.map(|r| shared_limiter(config.provider, r));
        Ok(Self { config, transport, api_key, limiter, backoff: Backoff::default() })
    }

    pub fn from_env(config: AgentConfig, transport: Arc<dyn Transport>) -> Result<Self, LlmError> {
        Self::new(config, transport, |k| std::env::var(k).ok())
    }

    pub fn with_backoff(mut self, backoff: Backoff) -> Self {
        self.backoff = backoff;
        self
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn complete(&self, messages: &[ChatMessage]) -> Result<String, LlmError> {
        let request = build_request(&self.config, &self.api_key, messages);
        let mut attempt = 0;
        loop {
            if let Some(l) = &self.limiter {
                l.acquire();
            }
            let failure = match self.transport.post(&request) {
                Ok(resp) if (200..300).contains(&resp.status) => {
                    return extract_text(self.config.provider, &resp.body);
                }
                Ok(resp) if resp.status == 401 || resp.status == 403 => {
                    return Err(LlmError::AuthError(format!("status {}: {}", resp.status, excerpt(&resp.body))));
                }
                Ok(resp) if resp.status == 429 => LlmError::RateLimited(attempt + 1),
                Ok(resp) if resp.status >= 500 => {
                    LlmError::ProviderError { status: resp.status, body: excerpt(&resp.body) }
                }
                Ok(resp) => {
                    return Err(LlmError::ProviderError { status: resp.status, body: excerpt(&resp.body) });
                }
                Err(TransportError::Timeout) => LlmError::Timeout,
                Err(TransportError::Connection(e)) => LlmError::Transport(e),
            };
            if attempt >= self.config.max_retries {
                return Err(failure);
            }
            log::warn!("{} request failed ({failure}); retry {}", self.config.provider, attempt + 1);
            std::thread::sleep(self.backoff.delay(attempt));
            attempt += 1;
        }
    }
}

impl Agent for ChatClient {
    fn respond(&mut self, messages: &[ChatMessage]) -> Result<String, LlmError> {
        self.complete(messages)
    }

    fn summary(&self) -> AgentSummary {
        self.config.summary()
    }
}
