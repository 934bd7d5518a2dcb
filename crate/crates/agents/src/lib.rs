//! Creator/Inspector orchestration for constitutive model design.
//!
//! A Creator proposes declarative model descriptors; every proposal goes
//! through syntactic checks, training and an Inspector audit against the
//! nine physical constraints. Flagged violations are fed back to the
//! Creator until the Inspector approves, and approved models are exported.
//! Backends are either scripted mocks (fully deterministic) or a live
//! chat-completion endpoint.

pub mod analytics;
pub mod backend;
pub mod checks;
pub mod live;
pub mod mock;
pub mod pipeline;
pub mod prompts;
pub mod protocol;
pub mod transcript;

use thiserror::Error;

pub use analytics::{classify_transition, ground_truth_label, ConfusionSummary, PipelineState, Transition};
pub use backend::{build_backend, BackendSpec, ChatBackend, ChatMessage, Role};
pub use checks::{syntactic_checks, CheckStage, SyntacticReport};
pub use pipeline::{run_pipeline, run_pipeline_with_config, PipelineConfig, PipelineRun};
pub use protocol::{InspectorVerdict, ModelProposal};
pub use transcript::{Transcript, TranscriptRecord};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("malformed proposal: {0}")]
    MalformedProposal(String),
    #[error("malformed verdict: {0}")]
    MalformedVerdict(String),
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("authentication failed: {0}")]
    AuthFailure(String),
    #[error("backend `{backend}` cannot act as {role}")]
    RoleMismatch { backend: String, role: Role },
    #[error("invalid pipeline config: {0}")]
    InvalidConfig(String),
    #[error("run aborted: no model was exported")]
    RunAborted(Box<PipelineRun>),
    #[error(transparent)]
    Dataset(#[from] hyperaudit_core::datasets::DatasetError),
}
