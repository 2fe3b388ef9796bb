//! Chat messages, prompt construction, response parsing, and the agents that
//! answer prompts (HTTP providers and offline scripted policies).

pub mod client;
#[cfg(feature = "http")]
pub mod http;
pub mod parse;
pub mod prompt;
pub mod scripted;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::render::ImageHint;

pub use client::{ChatClient, Transport};
pub use parse::{parse_response, ParseError, ParsedResponse};
pub use prompt::{feedback_prompt, initial_prompt, PromptError};
pub use scripted::{ScriptPolicy, ScriptedAgent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<ImageHint>,
}

impl ChatMessage {
    pub fn system(text: impl Into<String>) -> Self {
        Self { role: Role::System, text: text.into(), image: None }
    }

    pub fn user(text: impl Into<String>) -> Self {
        Self { role: Role::User, text: text.into(), image: None }
    }

    pub fn assistant(text: impl Into<String>) -> Self {
        Self { role: Role::Assistant, text: text.into(), image: None }
    }

    /// Images only ride on user messages; other roles ignore the attachment.
    pub fn with_image(mut self, image: ImageHint) -> Self {
        if self.role == Role::User {
            self.image = Some(image);
        }
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provider {
    Gemini,
    Gpt4o,
    Claude,
    Scripted,
}

impl Provider {
    pub fn credential_var(self) -> Option<&'static str> {
        match self {
            Provider::Gemini => Some("GEMINI_API_KEY"),
            Provider::Gpt4o => Some("OPENAI_API_KEY"),
            Provider::Claude => Some("ANTHROPIC_API_KEY"),
            Provider::Scripted => None,
        }
    }

    pub fn default_model(self) -> &'static str {
        match self {
            Provider::Gemini => "gemini-1.5-pro",
            Provider::Gpt4o => "gpt-4o",
            Provider::Claude => "claude-3-5-sonnet-latest",
            Provider::Scripted => "follow-free-space",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Provider::Gemini => "gemini",
            Provider::Gpt4o => "gpt4o",
            Provider::Claude => "claude",
            Provider::Scripted => "scripted",
        }
    }
}

impl fmt::Display for Provider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Provider {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gemini" | "google" => Ok(Provider::Gemini),
            "gpt4o" | "gpt-4o" | "openai" => Ok(Provider::Gpt4o),
            "claude" | "anthropic" => Ok(Provider::Claude),
            "scripted" => Ok(Provider::Scripted),
            other => Err(format!("unknown provider `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentConfig {
    pub provider: Provider,
    pub model_id: String,
    /// `None` leaves the provider default in place.
    pub temperature: Option<f64>,
    pub timeout: Duration,
    pub max_retries: u32,
    /// Shared across all workers talking to the same provider.
    pub requests_per_minute: Option<u32>,
    /// Overrides the provider's public endpoint (proxies, test servers).
    pub base_url: Option<String>,
}

impl AgentConfig {
    pub fn new(provider: Provider, model_id: impl Into<String>) -> Self {
        Self {
            provider,
            model_id: model_id.into(),
            temperature: None,
            timeout: Duration::from_secs(120),
            max_retries: 3,
            requests_per_minute: None,
            base_url: None,
        }
    }

    /// `provider:model`, or a bare provider name for its default model.
    pub fn parse(spec: &str) -> Result<Self, String> {
        let (provider, model) = match spec.split_once(':') {
            Some((p, m)) => (p.parse::<Provider>()?, m.to_string()),
            None => {
                let p = spec.parse::<Provider>()?;
                (p, p.default_model().to_string())
            }
        };
        if model.is_empty() {
            return Err(format!("missing model in `{spec}`"));
        }
        Ok(Self::new(provider, model))
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.timeout.is_zero() {
            return Err("timeout must be positive".into());
        }
        Ok(())
    }

    pub fn summary(&self) -> AgentSummary {
        AgentSummary {
            provider: self.provider,
            model_id: self.model_id.clone(),
            temperature: self.temperature,
        }
    }
}

/// The part of an agent configuration recorded with each run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentSummary {
    pub provider: Provider,
    pub model_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

impl AgentSummary {
    pub fn label(&self) -> String {
        format!("{}:{}", self.provider, self.model_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LlmError {
    #[error("authentication failed: {0}")]
    AuthError(String),
    #[error("rate limited after {0} attempts")]
    RateLimited(u32),
    #[error("request timed out")]
    Timeout,
    #[error("provider error {status}: {body}")]
    ProviderError { status: u16, body: String },
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("scripted agent: {0}")]
    Script(String),
}

impl LlmError {
    /// Failures of the surrounding infrastructure rather than of the model.
    pub fn is_infrastructure(&self) -> bool {
        !matches!(self, LlmError::Script(_))
    }
}

/// Anything that answers a conversation with assistant text.
pub trait Agent: Send {
    fn respond(&mut self, messages: &[ChatMessage]) -> Result<String, LlmError>;
    fn summary(&self) -> AgentSummary;
}

/// Builds an agent from a `provider:model` config. Scripted models name a
/// policy; live providers read their key from the process environment.
pub fn build_agent(config: &AgentConfig) -> Result<Box<dyn Agent>, LlmError> {
    match config.provider {
        Provider::Scripted => {
            let policy = ScriptPolicy::parse(&config.model_id).map_err(LlmError::Script)?;
            Ok(Box::new(ScriptedAgent::new(policy)))
        }
        _ => {
            let client = ChatClient::from_env(config.clone(), client::default_transport()?)?;
            Ok(Box::new(client))
        }
    }
}

/// One-shot completion using the process environment for credentials.
pub fn complete(config: &AgentConfig, messages: &[ChatMessage]) -> Result<String, LlmError> {
    build_agent(config)?.respond(messages)
}
