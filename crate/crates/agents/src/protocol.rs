//! Wire format between the pipeline and the agents.
//!
//! Every structured reply is a single fenced block holding one JSON object.
//! The Creator answers with a proposal, the Inspector either with a verdict
//! for all nine constraints or with a request to run one validator.

use std::collections::BTreeMap;

use hyperaudit_core::model::{FlatWeights, ModelDescriptor};
use hyperaudit_core::training::{Optimizer, TrainConfig};
use hyperaudit_core::validators::ConstraintId;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::AgentError;

/// Body of the first fenced block in `text`. A ```json fence is preferred
/// over a bare one.
pub fn extract_fenced_block(text: &str) -> Option<&str> {
    let mut blocks = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find("```") {
        let after = &rest[start + 3..];
        let line_end = after.find('\n')?;
        let lang = after[..line_end].trim();
        let body = &after[line_end + 1..];
        let end = body.find("```")?;
        blocks.push((lang, &body[..end]));
        rest = &body[end + 3..];
    }
    blocks
        .iter()
        .find(|(lang, _)| lang.eq_ignore_ascii_case("json"))
        .or_else(|| blocks.first())
        .map(|(_, body)| *body)
}

/// Parses the fenced block of `text` as JSON.
pub fn fenced_json(text: &str) -> Result<Value, String> {
    let body = extract_fenced_block(text).ok_or("reply has no fenced block")?;
    serde_json::from_str(body).map_err(|e| format!("fenced block is not valid JSON: {e}"))
}

/// Renders a value as a fenced JSON block.
pub fn fence(value: &impl Serialize) -> String {
    format!(
        "```json\n{}\n```",
        serde_json::to_string_pretty(value).expect("value serializes")
    )
}

/// Training settings a proposal may override.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<Optimizer>,
}

impl TrainOverrides {
    pub fn apply(&self, base: &TrainConfig) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs.unwrap_or(base.epochs),
            learning_rate: self.learning_rate.unwrap_or(base.learning_rate),
            optimizer: self.optimizer.unwrap_or(base.optimizer),
            ..*base
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelProposal {
    pub descriptor: ModelDescriptor,
    #[serde(default, skip_serializing_if = "is_default")]
    pub train: TrainOverrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_weights: Option<FlatWeights>,
    #[serde(default)]
    pub rationale: String,
}

fn is_default(t: &TrainOverrides) -> bool {
    *t == TrainOverrides::default()
}

impl ModelProposal {
    pub fn new(descriptor: ModelDescriptor, rationale: impl Into<String>) -> Self {
        Self {
            descriptor,
            train: TrainOverrides::default(),
            initial_weights: None,
            rationale: rationale.into(),
        }
    }

    /// Extracts and schema-validates the proposal in a Creator reply.
    pub fn parse(reply: &str) -> Result<Self, AgentError> {
        let value = fenced_json(reply).map_err(AgentError::MalformedProposal)?;
        let p: ModelProposal = serde_json::from_value(value)
            .map_err(|e| AgentError::MalformedProposal(format!("proposal schema: {e}")))?;
        p.descriptor
            .validate()
            .map_err(|e| AgentError::MalformedProposal(e.to_string()))?;
        if let Some(w) = &p.initial_weights {
            let n = p.descriptor.total_neurons();
            if w.inner.len() != n || w.outer.len() != n {
                return Err(AgentError::MalformedProposal(format!(
                    "initial weights need {n} inner and outer values"
                )));
            }
        }
        Ok(p)
    }

    pub fn to_reply(&self) -> String {
        fence(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Fulfilled,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Judgement {
    pub status: Status,
    #[serde(default)]
    pub justification: String,
}

/// Result of one validator run requested by the Inspector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolCall {
    pub constraint: ConstraintId,
    pub passed: bool,
    pub worst: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InspectorVerdict {
    pub verdicts: BTreeMap<ConstraintId, Judgement>,
    #[serde(default)]
    pub tool_calls: Vec<ToolCall>,
}

impl InspectorVerdict {
    pub fn violated(&self) -> Vec<ConstraintId> {
        self.verdicts
            .iter()
            .filter(|(_, j)| j.status == Status::Violated)
            .map(|(id, _)| *id)
            .collect()
    }

    pub fn all_fulfilled(&self) -> bool {
        self.violated().is_empty()
    }

    pub fn status(&self, id: ConstraintId) -> Status {
        self.verdicts[&id].status
    }
}

/// What an Inspector reply asks for.
#[derive(Clone, Debug, PartialEq)]
pub enum InspectorReply {
    Verdict(BTreeMap<ConstraintId, Judgement>),
    ToolCall(ConstraintId),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ToolRequest {
    constraint: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInspectorReply {
    #[serde(default)]
    verdicts: Option<BTreeMap<String, Judgement>>,
    #[serde(default)]
    tool_call: Option<ToolRequest>,
}

impl InspectorReply {
    pub fn parse(reply: &str) -> Result<Self, AgentError> {
        let bad = AgentError::MalformedVerdict;
        let value = fenced_json(reply).map_err(bad)?;
        let raw: RawInspectorReply =
            serde_json::from_value(value).map_err(|e| bad(format!("verdict schema: {e}")))?;
        match (raw.verdicts, raw.tool_call) {
            (Some(_), Some(_)) => Err(bad("reply holds both verdicts and a tool call".into())),
            (None, Some(t)) => t.constraint.parse().map(InspectorReply::ToolCall).map_err(bad),
            (None, None) => Err(bad("reply holds neither verdicts nor a tool call".into())),
            (Some(v), None) => {
                let mut out = BTreeMap::new();
                for (k, j) in v {
                    out.insert(k.parse::<ConstraintId>().map_err(bad)?, j);
                }
                let missing: Vec<_> = ConstraintId::ALL
                    .iter()
                    .filter(|id| !out.contains_key(id))
                    .map(|id| id.name())
                    .collect();
                if !missing.is_empty() {
                    return Err(bad(format!("missing constraints: {}", missing.join(", "))));
                }
                Ok(InspectorReply::Verdict(out))
            }
        }
    }
}

/// Fenced verdict block as an Inspector would write it.
pub fn verdict_reply(verdicts: &BTreeMap<ConstraintId, Judgement>) -> String {
    fence(&serde_json::json!({ "verdicts": verdicts }))
}

/// Fenced tool request as an Inspector would write it.
pub fn tool_call_reply(id: ConstraintId) -> String {
    fence(&serde_json::json!({ "tool_call": { "constraint": id } }))
}
