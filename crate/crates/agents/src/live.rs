//! Chat-completion backend over HTTP.
//!
//! Endpoint, credential, model name and timeout come from the environment
//! unless set explicitly. Each call is one `POST {base}/chat/completions`
//! with a JSON body; transport failures and 5xx/429 replies are retried up
//! to `max_attempts` times, so a call never blocks longer than
//! `timeout × max_attempts`.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::backend::{ChatBackend, ChatMessage, Role};
use crate::AgentError;

pub const ENV_BASE_URL: &str = "HYPERAUDIT_LLM_BASE_URL";
pub const ENV_API_KEY: &str = "HYPERAUDIT_LLM_API_KEY";
pub const ENV_MODEL: &str = "HYPERAUDIT_LLM_MODEL";
pub const ENV_TIMEOUT_SECS: &str = "HYPERAUDIT_LLM_TIMEOUT_SECS";

pub const DEFAULT_TIMEOUT_SECS: f64 = 120.0;
pub const DEFAULT_MAX_ATTEMPTS: u32 = 3;

/// Config-file view of a live backend; unset fields fall back to the
/// environment.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LiveSettings {
    pub base_url: Option<String>,
    pub model: Option<String>,
    /// Name of the variable holding the credential.
    pub api_key_env: Option<String>,
    pub timeout_secs: Option<f64>,
    pub max_attempts: Option<u32>,
}

/// Fully resolved endpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct LiveEndpoint {
    pub base_url: String,
    pub api_key: String,
    pub model: String,
    pub timeout: Duration,
    pub max_attempts: u32,
}

impl LiveEndpoint {
    /// Resolves settings against the environment. The credential is checked
    /// first, so a missing key fails before anything else is looked at.
    pub fn resolve(settings: &LiveSettings) -> Result<Self, AgentError> {
        let key_var = settings.api_key_env.as_deref().unwrap_or(ENV_API_KEY);
        let api_key = std::env::var(key_var)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| AgentError::AuthFailure(format!("credential variable {key_var} is not set")))?;
        let pick = |explicit: &Option<String>, var: &str| {
            explicit
                .clone()
                .or_else(|| std::env::var(var).ok())
                .filter(|s| !s.trim().is_empty())
                .ok_or_else(|| AgentError::InvalidConfig(format!("{var} is not set")))
        };
        let base_url = pick(&settings.base_url, ENV_BASE_URL)?;
        let model = pick(&settings.model, ENV_MODEL)?;
        let timeout_secs = match settings.timeout_secs {
            Some(t) => t,
            None => match std::env::var(ENV_TIMEOUT_SECS) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| AgentError::InvalidConfig(format!("{ENV_TIMEOUT_SECS} is not a number: {v}")))?,
                Err(_) => DEFAULT_TIMEOUT_SECS,
            },
        };
        if !(timeout_secs > 0.0 && timeout_secs.is_finite()) {
            return Err(AgentError::InvalidConfig(format!("timeout must be positive, got {timeout_secs}")));
        }
        Ok(Self {
            base_url,
            api_key,
            model,
            timeout: Duration::from_secs_f64(timeout_secs),
            max_attempts: settings.max_attempts.unwrap_or(DEFAULT_MAX_ATTEMPTS).max(1),
        })
    }
}

pub struct LiveBackend {
    endpoint: LiveEndpoint,
    role: Role,
    agent: ureq::Agent,
}

enum Failure {
    Retry(String),
    Fatal(AgentError),
}

impl LiveBackend {
    pub fn new(endpoint: LiveEndpoint, role: Role) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(endpoint.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { endpoint, role, agent }
    }

    pub fn from_env(settings: &LiveSettings, role: Role) -> Result<Self, AgentError> {
        Ok(Self::new(LiveEndpoint::resolve(settings)?, role))
    }

    pub fn endpoint(&self) -> &LiveEndpoint {
        &self.endpoint
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.endpoint.base_url.trim_end_matches('/'))
    }

    fn attempt(&self, body: &str) -> Result<String, Failure> {
        let mut resp = self
            .agent
            .post(&self.url())
            .header("Authorization", &format!("Bearer {}", self.endpoint.api_key))
            .header("Content-Type", "application/json")
            .send(body)
            .map_err(|e| Failure::Retry(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Failure::Retry(format!("reading response: {e}")))?;
        match status {
            200..=299 => extract_content(&text).map_err(|e| Failure::Fatal(AgentError::BackendUnavailable(e))),
            401 | 403 => Err(Failure::Fatal(AgentError::AuthFailure(format!("HTTP {status}: {text}")))),
            429 | 500..=599 => Err(Failure::Retry(format!("HTTP {status}"))),
            _ => Err(Failure::Fatal(AgentError::BackendUnavailable(format!("HTTP {status}: {text}")))),
        }
    }
}

/// `choices[0].message.content` of a chat-completion response.
pub fn extract_content(body: &str) -> Result<String, String> {
    let v: Value = serde_json::from_str(body).map_err(|e| format!("response is not JSON: {e}"))?;
    v["choices"][0]["message"]["content"]
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| "response has no choices[0].message.content".to_string())
}

/// JSON body of a chat-completion request.
pub fn request_body(model: &str, messages: &[ChatMessage]) -> Value {
    json!({ "model": model, "messages": messages, "temperature": 0 })
}

impl ChatBackend for LiveBackend {
    fn id(&self) -> String {
        format!("live:{}", self.endpoint.model)
    }

    fn role(&self) -> Role {
        self.role
    }

    fn complete(&mut self, messages: &[ChatMessage]) -> Result<String, AgentError> {
        let body = request_body(&self.endpoint.model, messages).to_string();
        let mut last = String::new();
        for _ in 0..self.endpoint.max_attempts {
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retry(msg)) => last = msg,
            }
        }
        Err(AgentError::BackendUnavailable(format!(
            "{} attempts failed, last error: {last}",
            self.endpoint.max_attempts
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_credential_is_auth_failure() {
        let s = LiveSettings {
            api_key_env: Some("HYPERAUDIT_TEST_UNSET_KEY_7f3a".into()),
            base_url: Some("http://127.0.0.1:9".into()),
            model: Some("m".into()),
            ..LiveSettings::default()
        };
        assert!(matches!(LiveEndpoint::resolve(&s), Err(AgentError::AuthFailure(_))));
    }

    #[test]
    fn content_extraction() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"hi"}}]}"#;
        assert_eq!(extract_content(body).unwrap(), "hi");
        assert!(extract_content(r#"{"choices":[]}"#).is_err());
        assert!(extract_content("<html>").is_err());
    }

    #[test]
    fn body_shape() {
        let b = request_body("m", &[ChatMessage::user("x")]);
        assert_eq!(b["messages"][0]["role"], "user");
        assert_eq!(b["model"], "m");
    }
}
