//! The Creator/Inspector refinement loop.
//!
//! Each round the Creator proposes until the Inspector approves or the
//! correction budget runs out. A proposal is parsed, passed through the
//! syntactic checks, trained to the full budget and then audited; the
//! audited model is the one exported on approval. The first round starts
//! from the task prompt, later rounds from the latest exported model and
//! its predictions. The export with the highest mean R² is selected.

use std::collections::BTreeMap;

use hyperaudit_core::datasets::StressStrainDataset;
use hyperaudit_core::model::ModelFile;
use hyperaudit_core::training::{evaluate_fit, train, FitReport, ModeFit, TrainConfig};
use hyperaudit_core::validators::{check, validate_all, ConstraintId, ToleranceConfig, ValidationReport};
use hyperaudit_core::ConstitutiveModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytics::{classify_transition, PipelineState, Transition};
use crate::backend::{build_backend, BackendSpec, ChatBackend, ChatMessage, Role};
use crate::checks::{instantiate, syntactic_checks, SyntacticReport};
use crate::prompts;
use crate::protocol::{InspectorReply, InspectorVerdict, ModelProposal, ToolCall};
use crate::transcript::Transcript;
use crate::AgentError;

pub const DEFAULT_REFINEMENT_ROUNDS: usize = 2;
pub const DEFAULT_MAX_CORRECTIONS: usize = 5;
pub const DEFAULT_SYNTACTIC_EPOCH_CAP: usize = 200;
pub const DEFAULT_VIOLATING_EXPORT_PROBABILITY: f64 = 0.25;
pub const DEFAULT_MAX_TOOL_CALLS: usize = 18;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub creator: BackendSpec,
    pub inspector: BackendSpec,
    pub tools: bool,
    pub refinement_rounds: usize,
    /// Feedback messages allowed per round before it is aborted.
    pub max_corrections: usize,
    pub seed: u64,
    pub train: TrainConfig,
    pub syntactic_epoch_cap: usize,
    /// Chance that a flagged-violating model is labeled with the validators.
    pub violating_export_probability: f64,
    /// Tool calls allowed in one audit.
    pub max_tool_calls: usize,
    pub tolerances: ToleranceConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            creator: BackendSpec::mock("good_creator"),
            inspector: BackendSpec::mock("oracle_inspector"),
            tools: false,
            refinement_rounds: DEFAULT_REFINEMENT_ROUNDS,
            max_corrections: DEFAULT_MAX_CORRECTIONS,
            seed: 0,
            train: TrainConfig::default(),
            syntactic_epoch_cap: DEFAULT_SYNTACTIC_EPOCH_CAP,
            violating_export_probability: DEFAULT_VIOLATING_EXPORT_PROBABILITY,
            max_tool_calls: DEFAULT_MAX_TOOL_CALLS,
            tolerances: ToleranceConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = AgentError::InvalidConfig;
        self.tolerances.validate().map_err(bad)?;
        self.train.validate().map_err(|e| bad(e.to_string()))?;
        if !(0.0..=1.0).contains(&self.violating_export_probability) {
            return Err(bad(format!(
                "violating_export_probability must lie in [0, 1], got {}",
                self.violating_export_probability
            )));
        }
        if self.syntactic_epoch_cap == 0 {
            return Err(bad("syntactic_epoch_cap must be positive".into()));
        }
        Ok(())
    }
}

/// One Inspector audit of a trained proposal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InspectionRecord {
    pub verdict: InspectorVerdict,
    pub state: PipelineState,
    pub model: ModelFile,
    pub fit: Vec<ModeFit>,
    /// Validator outcome; present for exported and sampled models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<ValidationReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    /// Proposal number within the run.
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposal: Option<ModelProposal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse_error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub syntactic: Option<SyntacticReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inspection: Option<InspectionRecord>,
    /// Feedback sent to the Creator after this attempt.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportRecord {
    pub round: usize,
    pub model: ModelFile,
    pub fit: FitReport,
    /// Mean R² used for model selection (test split when present).
    pub score: Option<f64>,
    pub validation: ValidationReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoundOutcome {
    Exported,
    Aborted { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub attempts: Vec<AttemptRecord>,
    pub corrections: usize,
    pub outcome: RoundOutcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub export: Option<ExportRecord>,
    /// Validator invocations dispatched for the Inspector in this round.
    pub tool_histogram: BTreeMap<ConstraintId, usize>,
}

impl RoundRecord {
    pub fn tool_calls(&self) -> usize {
        self.tool_histogram.values().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub config: PipelineConfig,
    pub creator_id: String,
    pub inspector_id: String,
    pub dataset: String,
    pub rounds: Vec<RoundRecord>,
    /// One entry per Inspector verdict, starting from `Start`.
    pub transitions: Vec<Transition>,
    /// Round of the selected export.
    pub best_round: Option<usize>,
    #[serde(skip)]
    pub transcript: Transcript,
}

impl PipelineRun {
    pub fn inspections(&self) -> impl Iterator<Item = &InspectionRecord> {
        self.rounds
            .iter()
            .flat_map(|r| &r.attempts)
            .filter_map(|a| a.inspection.as_ref())
    }

    pub fn exports(&self) -> impl Iterator<Item = &ExportRecord> {
        self.rounds.iter().filter_map(|r| r.export.as_ref())
    }

    pub fn best(&self) -> Option<&ExportRecord> {
        self.best_round
            .and_then(|k| self.rounds.iter().find(|r| r.round == k))
            .and_then(|r| r.export.as_ref())
    }

    /// Visited states, `Start` first.
    pub fn state_sequence(&self) -> Vec<PipelineState> {
        let mut s = vec![PipelineState::Start];
        s.extend(self.transitions.iter().map(|t| t.to));
        s
    }

    pub fn tool_histogram(&self) -> BTreeMap<ConstraintId, usize> {
        let mut h: BTreeMap<ConstraintId, usize> = ConstraintId::ALL.into_iter().map(|id| (id, 0)).collect();
        for r in &self.rounds {
            for (id, n) in &r.tool_histogram {
                *h.entry(*id).or_default() += n;
            }
        }
        h
    }
}

enum AuditError {
    Agent(AgentError),
    Malformed(String),
}

impl From<AgentError> for AuditError {
    fn from(e: AgentError) -> Self {
        AuditError::Agent(e)
    }
}

struct Auditor<'a> {
    inspector: &'a mut dyn ChatBackend,
    config: &'a PipelineConfig,
}

impl Auditor<'_> {
    /// Audits `model`, dispatching tool calls and allowing one re-ask on
    /// an unusable reply.
    fn audit(
        &mut self,
        model: &ConstitutiveModel,
        round: usize,
        transcript: &mut Transcript,
        histogram: &mut BTreeMap<ConstraintId, usize>,
    ) -> Result<InspectorVerdict, AuditError> {
        let tools = self.config.tools;
        let mut messages = vec![
            ChatMessage::system(prompts::inspector_system_prompt()),
            ChatMessage::user(prompts::inspector_prompt(&ModelFile::from_model(model), tools)),
        ];
        let mut tool_calls = Vec::new();
        let mut reasked = false;
        loop {
            let reply = transcript.call(self.inspector, round, &messages)?;
            messages.push(ChatMessage::assistant(reply.clone()));
            let (reason, reask) = match InspectorReply::parse(&reply) {
                Ok(InspectorReply::Verdict(verdicts)) => return Ok(InspectorVerdict { verdicts, tool_calls }),
                Ok(InspectorReply::ToolCall(id)) if tools && tool_calls.len() < self.config.max_tool_calls => {
                    let v = check(id, model, &self.config.tolerances);
                    let result = prompts::tool_result_message(&v);
                    transcript.tool_event(round, id.name().to_string(), result.clone());
                    *histogram.entry(id).or_default() += 1;
                    tool_calls.push(ToolCall {
                        constraint: id,
                        passed: v.passed,
                        worst: v.worst,
                    });
                    messages.push(ChatMessage::user(result));
                    continue;
                }
                Ok(InspectorReply::ToolCall(id)) => {
                    let reason = if tools { "tool call limit reached" } else { "tools are disabled" };
                    (reason.to_string(), prompts::tool_refusal(id))
                }
                Err(e) => (e.to_string(), prompts::verdict_reask(&e.to_string())),
            };
            if reasked {
                return Err(AuditError::Malformed(reason));
            }
            reasked = true;
            messages.push(ChatMessage::user(reask));
        }
    }
}

fn score(fit: &FitReport, test: Option<&[ModeFit]>) -> Option<f64> {
    match test {
        Some(modes) => {
            let v: Vec<f64> = modes.iter().filter_map(|m| m.r2).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        }
        None => fit.mean_r2(),
    }
}

/// Builds both backends from the config and runs the loop.
pub fn run_pipeline_with_config(config: &PipelineConfig, dataset: &StressStrainDataset) -> Result<PipelineRun, AgentError> {
    config.validate()?;
    let mut creator = build_backend(&config.creator, Role::Creator, &config.tolerances)?;
    let mut inspector = build_backend(&config.inspector, Role::Inspector, &config.tolerances)?;
    run_pipeline(config, dataset, creator.as_mut(), inspector.as_mut())
}

/// Runs the full loop. Fails with [`AgentError::RunAborted`] when no round
/// exports a model.
pub fn run_pipeline(
    config: &PipelineConfig,
    dataset: &StressStrainDataset,
    creator: &mut dyn ChatBackend,
    inspector: &mut dyn ChatBackend,
) -> Result<PipelineRun, AgentError> {
    config.validate()?;
    for (b, role) in [(&*creator, Role::Creator), (&*inspector, Role::Inspector)] {
        if b.role() != role {
            return Err(AgentError::RoleMismatch { backend: b.id(), role });
        }
    }
    let (train_ds, test_ds) = dataset.train_test_split(false)?;
    if train_ds.is_empty() {
        return Err(AgentError::InvalidConfig(format!("dataset `{}` has no training samples", dataset.name)));
    }

    let mut run = PipelineRun {
        config: config.clone(),
        creator_id: creator.id(),
        inspector_id: inspector.id(),
        dataset: dataset.name.clone(),
        rounds: Vec::new(),
        transitions: Vec::new(),
        best_round: None,
        transcript: Transcript::default(),
    };
    let mut auditor = Auditor { inspector, config };
    let mut label_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut previous: Option<InspectorVerdict> = None;
    let mut state = PipelineState::Start;
    let mut current: Option<(ConstitutiveModel, FitReport)> = None;
    let mut proposals = 0usize;

    for round in 0..=config.refinement_rounds {
        let task = match &current {
            None => prompts::creator_task_prompt(&train_ds),
            Some((model, fit)) => prompts::refinement_prompt(
                model.descriptor(),
                &prompts::predictions_table(model, &train_ds, fit),
                &train_ds,
            ),
        };
        let mut messages = vec![
            ChatMessage::system(prompts::creator_system_prompt()),
            ChatMessage::user(task),
        ];
        let mut rec = RoundRecord {
            round,
            attempts: Vec::new(),
            corrections: 0,
            outcome: RoundOutcome::Aborted {
                reason: "correction budget exhausted".into(),
            },
            export: None,
            tool_histogram: BTreeMap::new(),
        };

        loop {
            let reply = run.transcript.call(creator, round, &messages)?;
            messages.push(ChatMessage::assistant(reply.clone()));
            let mut attempt = AttemptRecord {
                index: proposals,
                proposal: None,
                parse_error: None,
                syntactic: None,
                training_error: None,
                inspection: None,
                feedback: None,
            };
            let seed = config.seed.wrapping_add(proposals as u64);
            proposals += 1;

            let feedback = match ModelProposal::parse(&reply) {
                Err(e) => {
                    let reason = e.to_string();
                    attempt.parse_error = Some(reason.clone());
                    prompts::parse_feedback(&reason)
                }
                Ok(p) => {
                    let cfg = TrainConfig { seed, ..p.train.apply(&config.train) };
                    let syn = syntactic_checks(&p, &train_ds, &cfg, config.syntactic_epoch_cap);
                    let passed = syn.passed();
                    let fb = (!passed).then(|| prompts::syntactic_feedback(&syn));
                    attempt.syntactic = Some(syn);
                    attempt.proposal = Some(p.clone());
                    match fb {
                        Some(fb) => fb,
                        None => {
                            let init = instantiate(&p, &cfg).map_err(AgentError::MalformedProposal)?;
                            match train(&init, &train_ds, &cfg) {
                                Err(e) => {
                                    let reason = format!("training to the full budget failed: {e}");
                                    attempt.training_error = Some(reason.clone());
                                    prompts::parse_feedback(&reason)
                                }
                                Ok((model, fit)) => {
                                    let verdict =
                                        match auditor.audit(&model, round, &mut run.transcript, &mut rec.tool_histogram) {
                                            Ok(v) => v,
                                            Err(AuditError::Agent(e)) => return Err(e),
                                            Err(AuditError::Malformed(reason)) => {
                                                rec.attempts.push(attempt);
                                                rec.outcome = RoundOutcome::Aborted {
                                                    reason: format!("unusable verdict after one re-ask: {reason}"),
                                                };
                                                break;
                                            }
                                        };
                                    let next = classify_transition(previous.as_ref(), &verdict);
                                    run.transitions.push(Transition { from: state, to: next });
                                    state = next;
                                    previous = Some(verdict.clone());

                                    let approved = verdict.all_fulfilled();
                                    let label = approved || label_rng.random_bool(config.violating_export_probability);
                                    let ground_truth = label.then(|| validate_all(&model, &config.tolerances));
                                    let test_fit = if test_ds.is_empty() {
                                        None
                                    } else {
                                        Some(evaluate_fit(&model, &test_ds).map_err(|e| AgentError::InvalidConfig(e.to_string()))?)
                                    };
                                    let fb = (!approved).then(|| prompts::violation_feedback(&verdict));
                                    attempt.inspection = Some(InspectionRecord {
                                        verdict,
                                        state: next,
                                        model: ModelFile::from_model(&model),
                                        fit: test_fit.clone().unwrap_or_else(|| fit.modes.clone()),
                                        ground_truth: ground_truth.clone(),
                                    });
                                    match fb {
                                        Some(fb) => fb,
                                        None => {
                                            rec.attempts.push(attempt);
                                            rec.export = Some(ExportRecord {
                                                round,
                                                model: ModelFile::from_model(&model),
                                                score: score(&fit, test_fit.as_deref()),
                                                fit: fit.clone(),
                                                validation: ground_truth.expect("approved models are labeled"),
                                            });
                                            rec.outcome = RoundOutcome::Exported;
                                            current = Some((model, fit));
                                            break;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            };

            if rec.corrections == config.max_corrections {
                rec.attempts.push(attempt);
                break;
            }
            rec.corrections += 1;
            attempt.feedback = Some(feedback.clone());
            rec.attempts.push(attempt);
            messages.push(ChatMessage::user(feedback));
        }
        run.rounds.push(rec);
    }

    let mut best: Option<(usize, f64)> = None;
    for e in run.exports() {
        let s = e.score.unwrap_or(f64::NEG_INFINITY);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((e.round, s));
        }
    }
    run.best_round = best.map(|(r, _)| r);
    if run.best_round.is_none() {
        return Err(AgentError::RunAborted(Box::new(run)));
    }
    Ok(run)
}
