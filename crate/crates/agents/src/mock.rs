//! Scripted agents for deterministic runs.
//!
//! Creators pick their next proposal from a fixed script indexed by how
//! often they have been called. Inspectors read the model document out of
//! the prompt; the oracle mirrors the validators exactly.

use std::collections::BTreeMap;
use std::str::FromStr;

use hyperaudit_core::model::fixtures::{
    four_term_descriptor, free_negative_fixture, full_block_descriptor, raw_f_fixture, skew_fixture,
    softplus_raw_fixture, sine_fixture, two_term_descriptor,
};
use hyperaudit_core::model::{ActivationKind, FeatureKind, ModelDescriptor, ModelFile, TermSpec};
use hyperaudit_core::training::Optimizer;
use hyperaudit_core::validators::{validate_all, ConstraintId, ConstraintVerdict, ToleranceConfig};
use hyperaudit_core::ConstitutiveModel;
use serde::Deserialize;

use crate::backend::{ChatBackend, ChatMessage, MessageRole, Role};
use crate::prompts::TOOL_SENTENCE;
use crate::protocol::{fenced_json, tool_call_reply, verdict_reply, Judgement, ModelProposal, Status, TrainOverrides};
use crate::AgentError;

/// Proposal templates available to scripted Creators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Template {
    TwoTerm,
    FourTerm,
    FullBlock,
    RawF,
    Sine,
    SoftplusRaw,
    FreeNegative,
    Skew,
    /// Free square block with a step size that makes training diverge.
    Divergent,
}

impl Template {
    pub const ALL: [Template; 9] = [
        Template::TwoTerm,
        Template::FourTerm,
        Template::FullBlock,
        Template::RawF,
        Template::Sine,
        Template::SoftplusRaw,
        Template::FreeNegative,
        Template::Skew,
        Template::Divergent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Template::TwoTerm => "two_term",
            Template::FourTerm => "four_term",
            Template::FullBlock => "full_block",
            Template::RawF => "raw_f",
            Template::Sine => "sine",
            Template::SoftplusRaw => "softplus_raw",
            Template::FreeNegative => "free_negative",
            Template::Skew => "skew",
            Template::Divergent => "divergent",
        }
    }

    fn from_fixture(model: ConstitutiveModel, rationale: &str) -> ModelProposal {
        let file = ModelFile::from_model(&model);
        ModelProposal {
            initial_weights: Some(file.weights),
            ..ModelProposal::new(file.descriptor, rationale)
        }
    }

    pub fn proposal(self) -> ModelProposal {
        let canonical = |d: ModelDescriptor, why: &str| ModelProposal::new(d, why);
        match self {
            Template::TwoTerm => canonical(two_term_descriptor(), "linear blocks on both invariants"),
            Template::FourTerm => canonical(four_term_descriptor(), "linear and softplus blocks on both invariants"),
            Template::FullBlock => canonical(full_block_descriptor(1), "every convex activation on both invariants"),
            Template::RawF => Self::from_fixture(raw_f_fixture(), "stiffening read directly from the thickness stretch"),
            Template::Sine => Self::from_fixture(sine_fixture(), "oscillating correction on the first invariant"),
            Template::SoftplusRaw => Self::from_fixture(softplus_raw_fixture(), "smooth softplus energy"),
            Template::FreeNegative => Self::from_fixture(free_negative_fixture(), "unconstrained linear weight"),
            Template::Skew => Self::from_fixture(skew_fixture(0.1), "extra shear coupling in the stress"),
            Template::Divergent => {
                let d = ModelDescriptor::new(
                    "divergent",
                    vec![TermSpec::new(FeatureKind::I1m3, ActivationKind::Square, 1).free()],
                );
                let mut p = ModelProposal::new(d, "aggressive plain gradient descent");
                p.train = TrainOverrides {
                    learning_rate: Some(1e3),
                    optimizer: Some(Optimizer::Sgd),
                    ..TrainOverrides::default()
                };
                p
            }
        }
    }
}

impl FromStr for Template {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Template::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown proposal template `{s}`"))
    }
}

const GOOD_CYCLE: [Template; 3] = [Template::TwoTerm, Template::FourTerm, Template::FullBlock];

/// Parsed mock script id.
#[derive(Clone, Debug, PartialEq)]
pub enum MockScript {
    /// Cycles through canonical designs.
    GoodCreator,
    /// RawF design first, canonical designs after any feedback.
    FlakyCreator,
    /// Always the RawF design.
    StubbornCreator,
    /// `scripted:a,b,...`; the last template repeats.
    ScriptedCreator(Vec<Template>),
    /// Verdict equals the validators; with tools it calls all nine.
    OracleInspector,
    /// Approves everything.
    BlindInspector,
    /// `selective_inspector:a,b`; calls the listed tools, approves the rest.
    SelectiveInspector(Vec<ConstraintId>),
    /// Omits a constraint on the first reply of each audit, approves
    /// everything when asked again.
    SloppyInspector,
    /// Never produces a parseable verdict.
    GarbledInspector,
}

impl FromStr for MockScript {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, args) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let list = || -> Vec<&str> {
            args.map(|a| a.split(',').map(str::trim).filter(|x| !x.is_empty()).collect())
                .unwrap_or_default()
        };
        let script = match head {
            "good_creator" => MockScript::GoodCreator,
            "flaky_creator" => MockScript::FlakyCreator,
            "stubborn_creator" => MockScript::StubbornCreator,
            "scripted" => {
                let t = list().into_iter().map(str::parse).collect::<Result<Vec<_>, _>>()?;
                if t.is_empty() {
                    return Err("scripted creator needs at least one template".into());
                }
                MockScript::ScriptedCreator(t)
            }
            "oracle_inspector" => MockScript::OracleInspector,
            "blind_inspector" => MockScript::BlindInspector,
            "selective_inspector" => {
                MockScript::SelectiveInspector(list().into_iter().map(str::parse).collect::<Result<_, _>>()?)
            }
            "sloppy_inspector" => MockScript::SloppyInspector,
            "garbled_inspector" => MockScript::GarbledInspector,
            _ => return Err(format!("unknown mock script `{s}`")),
        };
        let takes_args = matches!(head, "scripted" | "selective_inspector");
        if args.is_some() && !takes_args {
            return Err(format!("mock script `{head}` takes no arguments"));
        }
        Ok(script)
    }
}

impl MockScript {
    pub fn role(&self) -> Role {
        match self {
            MockScript::GoodCreator
            | MockScript::FlakyCreator
            | MockScript::StubbornCreator
            | MockScript::ScriptedCreator(_) => Role::Creator,
            _ => Role::Inspector,
        }
    }

    pub fn build(&self, tolerances: &ToleranceConfig) -> Box<dyn ChatBackend> {
        Box::new(MockBackend {
            script: self.clone(),
            tolerances: *tolerances,
            calls: 0,
        })
    }

    fn script_id(&self) -> String {
        let join = |v: Vec<&str>| v.join(",");
        match self {
            MockScript::GoodCreator => "good_creator".into(),
            MockScript::FlakyCreator => "flaky_creator".into(),
            MockScript::StubbornCreator => "stubborn_creator".into(),
            MockScript::ScriptedCreator(t) => format!("scripted:{}", join(t.iter().map(|t| t.name()).collect())),
            MockScript::OracleInspector => "oracle_inspector".into(),
            MockScript::BlindInspector => "blind_inspector".into(),
            MockScript::SelectiveInspector(ids) => {
                format!("selective_inspector:{}", join(ids.iter().map(|i| i.name()).collect()))
            }
            MockScript::SloppyInspector => "sloppy_inspector".into(),
            MockScript::GarbledInspector => "garbled_inspector".into(),
        }
    }
}

pub struct MockBackend {
    script: MockScript,
    tolerances: ToleranceConfig,
    calls: usize,
}

fn judgement(status: Status, justification: impl Into<String>) -> Judgement {
    Judgement {
        status,
        justification: justification.into(),
    }
}

fn all_fulfilled() -> BTreeMap<ConstraintId, Judgement> {
    ConstraintId::ALL
        .into_iter()
        .map(|id| (id, judgement(Status::Fulfilled, "no concern found")))
        .collect()
}

fn mirror(v: &ConstraintVerdict) -> Judgement {
    if v.passed {
        judgement(Status::Fulfilled, format!("validator passed, worst deviation {:e}", v.worst))
    } else {
        let why = v.note.clone().unwrap_or_else(|| format!("worst deviation {:e}", v.worst));
        judgement(Status::Violated, format!("validator failed: {why}"))
    }
}

#[derive(Deserialize)]
struct ToolResult {
    tool_result: ConstraintVerdict,
}

/// Prompt of the current audit: the first user message.
fn audit_prompt(messages: &[ChatMessage]) -> Option<&str> {
    messages
        .iter()
        .find(|m| m.role == MessageRole::User)
        .map(|m| m.content.as_str())
}

fn tool_results(messages: &[ChatMessage]) -> Vec<ConstraintVerdict> {
    messages
        .iter()
        .filter(|m| m.role == MessageRole::User)
        .filter_map(|m| fenced_json(&m.content).ok())
        .filter_map(|v| serde_json::from_value::<ToolResult>(v).ok())
        .map(|r| r.tool_result)
        .collect()
}

fn model_from_prompt(prompt: &str) -> Result<ConstitutiveModel, String> {
    let value = fenced_json(prompt)?;
    let file: ModelFile = serde_json::from_value(value).map_err(|e| e.to_string())?;
    file.into_model().map_err(|e| e.to_string())
}

impl MockBackend {
    fn creator_reply(&self, k: usize) -> String {
        let t = match &self.script {
            MockScript::GoodCreator => GOOD_CYCLE[k % GOOD_CYCLE.len()],
            MockScript::FlakyCreator if k == 0 => Template::RawF,
            MockScript::FlakyCreator => GOOD_CYCLE[(k - 1) % GOOD_CYCLE.len()],
            MockScript::StubbornCreator => Template::RawF,
            MockScript::ScriptedCreator(list) => list[k.min(list.len() - 1)],
            _ => unreachable!("inspector script asked to create"),
        };
        format!("Proposal `{}`.\n{}", t.name(), t.proposal().to_reply())
    }

    fn inspector_reply(&self, messages: &[ChatMessage]) -> String {
        let Some(prompt) = audit_prompt(messages) else {
            return "No model to audit.".into();
        };
        let tools = prompt.contains(TOOL_SENTENCE);
        let results = tool_results(messages);
        match &self.script {
            MockScript::BlindInspector => verdict_reply(&all_fulfilled()),
            MockScript::GarbledInspector => "Looks physically reasonable to me.".into(),
            MockScript::SloppyInspector => {
                let answered = messages.iter().any(|m| m.role == MessageRole::Assistant);
                let mut v = all_fulfilled();
                if !answered {
                    v.remove(&ConstraintId::Growth);
                }
                verdict_reply(&v)
            }
            MockScript::SelectiveInspector(ids) => {
                if tools && results.len() < ids.len() {
                    return tool_call_reply(ids[results.len()]);
                }
                let mut v = all_fulfilled();
                for r in &results {
                    v.insert(r.id, mirror(r));
                }
                verdict_reply(&v)
            }
            MockScript::OracleInspector => {
                let verdicts: Vec<ConstraintVerdict> = if tools {
                    if results.len() < ConstraintId::ALL.len() {
                        return tool_call_reply(ConstraintId::ALL[results.len()]);
                    }
                    results
                } else {
                    match model_from_prompt(prompt) {
                        Ok(m) => validate_all(&m, &self.tolerances).verdicts,
                        Err(e) => return format!("Cannot read the model document: {e}"),
                    }
                };
                verdict_reply(&verdicts.iter().map(|v| (v.id, mirror(v))).collect())
            }
            _ => unreachable!("creator script asked to inspect"),
        }
    }
}

impl ChatBackend for MockBackend {
    fn id(&self) -> String {
        format!("mock:{}", self.script.script_id())
    }

    fn role(&self) -> Role {
        self.script.role()
    }

    fn complete(&mut self, messages: &[ChatMessage]) -> Result<String, AgentError> {
        let k = self.calls;
        self.calls += 1;
        Ok(match self.script.role() {
            Role::Creator => self.creator_reply(k),
            Role::Inspector => self.inspector_reply(messages),
        })
    }
}
