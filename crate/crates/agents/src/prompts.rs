//! Prompt templates and feedback messages.

use std::fmt::Write;

use hyperaudit_core::datasets::StressStrainDataset;
use hyperaudit_core::model::{ModelDescriptor, ModelFile};
use hyperaudit_core::training::{predict_curve, FitReport};
use hyperaudit_core::validators::{ConstraintId, ConstraintVerdict};
use serde_json::json;

use crate::checks::SyntacticReport;
use crate::protocol::{fence, InspectorVerdict, Status};

/// The only text added to the Inspector prompt when tools are enabled.
pub const TOOL_SENTENCE: &str = "You may run the numerical validator for any single constraint by replying with {\"tool_call\": {\"constraint\": \"<id>\"}} in a fenced block, but do so only when you are genuinely uncertain.";

fn constraint_list() -> String {
    let mut s = String::new();
    for id in ConstraintId::ALL {
        writeln!(s, "- {}: {}", id.name(), id.description()).unwrap();
    }
    s
}

pub fn creator_system_prompt() -> String {
    "You design incompressible hyperelastic constitutive models as invariant-based networks. \
     Reply with exactly one fenced json block holding the proposal object."
        .to_string()
}

const PROPOSAL_FORMAT: &str = "\
Proposal format (one fenced json block):
{\"descriptor\": {\"terms\": [{\"feature\": \"I1m3\" | \"I2m3\" | {\"RawF\": {\"row\": i, \"col\": j}},
                           \"activation\": \"linear\" | \"square\" | \"softplus_shifted\" | \"softplus_sq\" | \"exp_m1my\" | \"softplus_raw\" | \"sine\",
                           \"neurons\": n, \"weight_constraint\": \"nonneg\" | \"free\", \"trainable\": true}],
                \"normalize_energy\": true, \"metadata\": {\"name\": \"...\"}},
 \"train\": {\"epochs\": n, \"learning_rate\": x},
 \"initial_weights\": {\"inner\": [...], \"outer\": [...]},
 \"rationale\": \"...\"}
`train` and `initial_weights` are optional.";

/// Modes, point counts and parameter ranges of a dataset.
pub fn dataset_summary(ds: &StressStrainDataset) -> String {
    let mut s = format!("Dataset `{}` (stress in {}):\n", ds.name, ds.unit);
    for m in &ds.modes {
        let p = m.params();
        let (lo, hi) = (p.first().copied().unwrap_or(f64::NAN), p.last().copied().unwrap_or(f64::NAN));
        writeln!(s, "- {}: {} points, parameter {lo} to {hi}", m.mode, p.len()).unwrap();
    }
    s
}

/// First prompt of a round.
pub fn creator_task_prompt(ds: &StressStrainDataset) -> String {
    format!(
        "Propose a constitutive model for the data below. The model must satisfy these constraints:\n{}\n{}\n{PROPOSAL_FORMAT}",
        constraint_list(),
        dataset_summary(ds)
    )
}

/// Per-mode `(param, target, prediction)` rows followed by an R²/MSE footer.
pub fn predictions_table(
    model: &hyperaudit_core::ConstitutiveModel,
    ds: &StressStrainDataset,
    fit: &FitReport,
) -> String {
    let mut s = String::new();
    for m in &ds.modes {
        writeln!(s, "{}", m.mode).unwrap();
        writeln!(s, "param\ttarget\tprediction").unwrap();
        let pred = predict_curve(model, m.mode, &m.params()).unwrap_or_else(|_| vec![f64::NAN; m.samples.len()]);
        for (sample, p) in m.samples.iter().zip(pred) {
            writeln!(s, "{:.4}\t{:.6}\t{:.6}", sample.param, sample.stress, p).unwrap();
        }
    }
    for f in &fit.modes {
        let r2 = f.r2.map_or("n/a".to_string(), |r| format!("{r:.6}"));
        writeln!(s, "{}: R2 = {r2}, MSE = {:.6e}", f.mode, f.mse).unwrap();
    }
    s
}

/// Prompt of a refinement round: current model, its predictions and metrics.
pub fn refinement_prompt(descriptor: &ModelDescriptor, table: &str, ds: &StressStrainDataset) -> String {
    format!(
        "Your current approved model:\n{}\nIts predictions on the training data:\n{table}\n\
         Propose an improved model that keeps every constraint satisfied:\n{}\n{}\n{PROPOSAL_FORMAT}",
        fence(descriptor),
        constraint_list(),
        dataset_summary(ds)
    )
}

pub fn syntactic_feedback(report: &SyntacticReport) -> String {
    format!(
        "Your proposal failed the {} check: {}. Fix it and reply with a corrected proposal.",
        report.failed_stage().map_or("parse", |s| s.name()),
        report.reason().unwrap_or("unknown failure")
    )
}

pub fn parse_feedback(reason: &str) -> String {
    format!("Your reply could not be used: {reason}. Reply with exactly one fenced json block holding the proposal.")
}

/// Flagged constraints and their justifications.
pub fn violation_feedback(verdict: &InspectorVerdict) -> String {
    let mut s = String::from("The Inspector flagged these constraint violations:\n");
    for (id, j) in &verdict.verdicts {
        if j.status == Status::Violated {
            writeln!(s, "- {id}: {}", j.justification).unwrap();
        }
    }
    s.push_str("Revise the model so that every constraint holds and reply with a new proposal.");
    s
}

pub fn inspector_system_prompt() -> String {
    "You audit hyperelastic constitutive models for physical admissibility. \
     Reply with exactly one fenced json block."
        .to_string()
}

const HINTS: &str = "\
Hints: features built from the invariants I1 and I2 are frame-indifferent and isotropic, raw components of F are not; \
activations that are convex and non-decreasing with non-negative weights keep the energy rank-one convex; \
an activation that is non-zero at the origin breaks normalization unless the energy is shifted; \
stress terms that do not derive from the energy break work path independence.";

/// Inspector prompt around a serialized model document.
pub fn inspector_prompt(model: &ModelFile, tools: bool) -> String {
    let mut s = format!(
        "Audit the model below against each constraint.\n{}\nModel document:\n{}\n{HINTS}\n\
         Reply with {{\"verdicts\": {{\"<constraint id>\": {{\"status\": \"fulfilled\" | \"violated\", \"justification\": \"...\"}}, ...}}}} covering all nine ids.",
        constraint_list(),
        fence(model)
    );
    if tools {
        s.push(' ');
        s.push_str(TOOL_SENTENCE);
    }
    s
}

pub fn verdict_reask(reason: &str) -> String {
    format!("Your verdict could not be parsed: {reason}. Reply again with all nine constraint verdicts in one fenced json block.")
}

/// Validator result fed back after a tool call.
pub fn tool_result_message(v: &ConstraintVerdict) -> String {
    fence(&json!({ "tool_result": v }))
}

pub fn tool_refusal(id: ConstraintId) -> String {
    format!("Tool `{id}` is not available. Reply with all nine constraint verdicts.")
}
