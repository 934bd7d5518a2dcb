//! Chat backend abstraction and construction from config.

use std::fmt;

use hyperaudit_core::validators::ToleranceConfig;
use serde::{Deserialize, Serialize};

use crate::live::{LiveBackend, LiveSettings};
use crate::mock::MockScript;
use crate::AgentError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Creator,
    Inspector,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Creator => "creator",
            Role::Inspector => "inspector",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageRole {
    System,
    User,
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: MessageRole,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: MessageRole::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: MessageRole::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: MessageRole::Assistant,
            content: content.into(),
        }
    }
}

/// One agent behind a chat interface.
pub trait ChatBackend: Send {
    /// Stable identifier recorded in run summaries.
    fn id(&self) -> String;
    fn role(&self) -> Role;
    fn complete(&mut self, messages: &[ChatMessage]) -> Result<String, AgentError>;
}

/// Serializable backend selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendSpec {
    /// Scripted agent, e.g. `good_creator` or `selective_inspector:ellipticity,growth`.
    Mock { script: String },
    Live(LiveSettings),
}

impl BackendSpec {
    pub fn mock(script: impl Into<String>) -> Self {
        BackendSpec::Mock { script: script.into() }
    }

    pub fn id(&self) -> String {
        match self {
            BackendSpec::Mock { script } => format!("mock:{script}"),
            BackendSpec::Live(s) => format!("live:{}", s.model.as_deref().unwrap_or("env")),
        }
    }
}

/// Instantiates a backend for `role`. Mock scripts have a fixed role; a
/// live endpoint can serve either. Mock inspectors that run validators use
/// `tolerances`.
pub fn build_backend(
    spec: &BackendSpec,
    role: Role,
    tolerances: &ToleranceConfig,
) -> Result<Box<dyn ChatBackend>, AgentError> {
    match spec {
        BackendSpec::Mock { script } => {
            let script: MockScript = script.parse().map_err(AgentError::InvalidConfig)?;
            if script.role() != role {
                return Err(AgentError::RoleMismatch {
                    backend: spec.id(),
                    role,
                });
            }
            Ok(script.build(tolerances))
        }
        BackendSpec::Live(settings) => Ok(Box::new(LiveBackend::from_env(settings, role)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn spec_serialization() {
        let s = BackendSpec::mock("good_creator");
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"kind":"mock","script":"good_creator"}"#);
        assert_eq!(serde_json::from_str::<BackendSpec>(&json).unwrap(), s);
        let live: BackendSpec = serde_json::from_str(r#"{"kind":"live","model":"m"}"#).unwrap();
        assert!(matches!(live, BackendSpec::Live(ref l) if l.model.as_deref() == Some("m")));
    }

    #[test]
    fn role_is_enforced() {
        let err = build_backend(&BackendSpec::mock("oracle_inspector"), Role::Creator, &tol()).err().unwrap();
        assert!(matches!(err, AgentError::RoleMismatch { .. }));
        assert!(build_backend(&BackendSpec::mock("good_creator"), Role::Creator, &tol()).is_ok());
        assert!(matches!(
            build_backend(&BackendSpec::mock("no_such_script"), Role::Creator, &tol()),
            Err(AgentError::InvalidConfig(_))
        ));
    }
}
