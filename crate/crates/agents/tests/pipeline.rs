//! End-to-end mock scenarios of the refinement loop.

use hyperaudit_agents::analytics::PipelineState::{self, *};
use hyperaudit_agents::pipeline::RoundOutcome;
use hyperaudit_agents::transcript::RecordKind;
use hyperaudit_agents::{
    ground_truth_label, run_pipeline_with_config, AgentError, BackendSpec, ConfusionSummary, PipelineConfig,
    PipelineRun, Role,
};
use hyperaudit_core::datasets::{generate_synthetic, rubber_protocols, StressStrainDataset, StressUnit};
use hyperaudit_core::model::fixtures::reference_material;
use hyperaudit_core::training::TrainConfig;
use hyperaudit_core::validators::{validate_all, ConstraintId, ToleranceConfig};
use hyperaudit_core::ConstitutiveModel;

fn data() -> StressStrainDataset {
    generate_synthetic(&reference_material(), "synthetic_mr", StressUnit::MPa, &rubber_protocols()).unwrap()
}

/// Coarse ellipticity sampling and a short training budget keep the
/// scenarios quick; the acceptance suite runs the full defaults.
fn config(creator: &str, inspector: &str) -> PipelineConfig {
    PipelineConfig {
        creator: BackendSpec::mock(creator),
        inspector: BackendSpec::mock(inspector),
        train: TrainConfig {
            epochs: 1000,
            learning_rate: 1e-2,
            ..TrainConfig::default()
        },
        tolerances: ToleranceConfig {
            grid_n: 12,
            n_dirs: 40,
            ..ToleranceConfig::default()
        },
        ..PipelineConfig::default()
    }
}

fn run(cfg: &PipelineConfig) -> PipelineRun {
    run_pipeline_with_config(cfg, &data()).unwrap()
}

#[test]
fn good_creator_exports_three_valid_models() {
    let cfg = config("good_creator", "oracle_inspector");
    let r = run(&cfg);
    assert_eq!(r.exports().count(), 3);
    for e in r.exports() {
        let m = e.model.clone().into_model().unwrap();
        assert!(validate_all(&m, &cfg.tolerances).overall);
        assert!(e.validation.overall);
    }
    let best = r.best().unwrap();
    let max = r.exports().map(|e| e.score.unwrap()).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(best.score.unwrap(), max);
    assert_eq!(r.state_sequence(), [Start, Adherence, Adherence, Adherence]);
    assert!(r.rounds.iter().all(|x| x.outcome == RoundOutcome::Exported));
}

#[test]
fn flaky_creator_transition_sequence() {
    let mut cfg = config("flaky_creator", "oracle_inspector");
    cfg.refinement_rounds = 0;
    let r = run(&cfg);
    assert_eq!(r.state_sequence(), [Start, NewViolation, Adherence]);
    let first = r.rounds[0].attempts[0].inspection.as_ref().unwrap();
    assert_eq!(first.verdict.violated(), [ConstraintId::Objectivity, ConstraintId::MaterialSymmetry]);
    assert!(r.rounds[0].attempts[0].feedback.as_ref().unwrap().contains("objectivity"));
    assert_eq!(r.transitions.len(), r.inspections().count());
}

#[test]
fn stubborn_creator_exhausts_budget() {
    let mut cfg = config("stubborn_creator", "oracle_inspector");
    cfg.refinement_rounds = 0;
    let err = run_pipeline_with_config(&cfg, &data()).unwrap_err();
    let AgentError::RunAborted(r) = err else {
        panic!("expected RunAborted, got {err}");
    };
    let round = &r.rounds[0];
    assert_eq!(round.attempts.len(), 1 + cfg.max_corrections);
    assert_eq!(round.corrections, 5);
    assert_eq!(round.attempts.iter().filter(|a| a.feedback.is_some()).count(), 5);
    assert!(matches!(round.outcome, RoundOutcome::Aborted { .. }));
    let seq = r.state_sequence();
    assert_eq!(seq[1], NewViolation);
    assert!(seq[2..].iter().all(|s| *s == RepeatedViolation));
}

#[test]
fn mock_runs_are_bitwise_reproducible() {
    let cfg = config("flaky_creator", "oracle_inspector");
    let (a, b) = (run(&cfg), run(&cfg));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.transcript.to_jsonl(), b.transcript.to_jsonl());
}

#[test]
fn oracle_verdicts_equal_validators() {
    let mut cfg = config("scripted:raw_f,sine,two_term", "oracle_inspector");
    cfg.refinement_rounds = 0;
    cfg.violating_export_probability = 1.0;
    let r = run(&cfg);
    for insp in r.inspections() {
        let m: ConstitutiveModel = insp.model.clone().into_model().unwrap();
        let truth = validate_all(&m, &cfg.tolerances);
        assert_eq!(insp.verdict.violated(), truth.failed());
        assert_eq!(insp.ground_truth.as_ref().unwrap().verdicts, truth.verdicts);
    }
    let c = ground_truth_label(&r);
    assert_eq!(c.adhering_accuracy(), Some(1.0));
    assert_eq!(c.violating_accuracy(), Some(1.0));
    assert_eq!(c.per_constraint.len(), 9);
}

#[test]
fn blind_inspector_confusion_arithmetic() {
    let mut parts = Vec::new();
    for k in 0..10 {
        let creator = if k == 3 { "stubborn_creator" } else { "good_creator" };
        let mut cfg = config(creator, "blind_inspector");
        cfg.refinement_rounds = 0;
        cfg.seed = k;
        parts.push(ground_truth_label(&run(&cfg)));
    }
    let total = ConfusionSummary::aggregate(&parts);
    assert_eq!(total.flagged_adhering.labeled, 10);
    assert_eq!(total.adhering_accuracy(), Some(0.9));
    assert_eq!(total.flagged_violating.flagged, 0);
    let obj = total.per_constraint[&ConstraintId::Objectivity];
    assert_eq!((obj.actually_violated, obj.flagged_violated), (1, 0));
}

#[test]
fn tool_calls_are_accounted() {
    let mut cfg = config("good_creator", "selective_inspector:ellipticity,growth");
    cfg.tools = true;
    cfg.refinement_rounds = 0;
    let r = run(&cfg);
    let insp: Vec<_> = r.inspections().collect();
    assert_eq!(insp.len(), 1);
    assert_eq!(insp[0].verdict.tool_calls.len(), 2);
    assert_eq!(r.rounds[0].tool_calls(), 2);
    let tool_events = r.transcript.records.iter().filter(|x| x.kind == RecordKind::Tool).count();
    assert_eq!(tool_events, 2);

    cfg.tools = false;
    let r = run(&cfg);
    assert!(r.inspections().all(|i| i.verdict.tool_calls.is_empty()));
    assert_eq!(r.rounds[0].tool_calls(), 0);
}

#[test]
fn oracle_with_tools_calls_all_nine() {
    let mut cfg = config("flaky_creator", "oracle_inspector");
    cfg.tools = true;
    cfg.refinement_rounds = 0;
    let r = run(&cfg);
    let h = r.tool_histogram();
    assert!(h.values().all(|n| *n == 2), "{h:?}");
    let dispatched: usize = r.inspections().map(|i| i.verdict.tool_calls.len()).sum();
    assert_eq!(dispatched, r.rounds.iter().map(|x| x.tool_calls()).sum::<usize>());
    assert_eq!(r.state_sequence(), [Start, NewViolation, Adherence]);
}

#[test]
fn malformed_verdicts_get_one_reask() {
    let mut cfg = config("good_creator", "sloppy_inspector");
    cfg.refinement_rounds = 0;
    let r = run(&cfg);
    let inspector_calls = r.transcript.records.iter().filter(|x| x.role == Role::Inspector).count();
    assert_eq!(inspector_calls, 2);
    assert_eq!(r.exports().count(), 1);

    cfg.inspector = BackendSpec::mock("garbled_inspector");
    let AgentError::RunAborted(r) = run_pipeline_with_config(&cfg, &data()).unwrap_err() else {
        panic!("expected RunAborted");
    };
    assert!(matches!(&r.rounds[0].outcome, RoundOutcome::Aborted { reason } if reason.contains("re-ask")));
    assert!(r.transitions.is_empty());
}

#[test]
fn syntactic_failures_are_fed_back() {
    let mut cfg = config("scripted:divergent,two_term", "oracle_inspector");
    cfg.refinement_rounds = 0;
    let r = run(&cfg);
    let a = &r.rounds[0].attempts;
    assert_eq!(a.len(), 2);
    let syn = a[0].syntactic.as_ref().unwrap();
    assert_eq!(syn.failed_stage(), Some(hyperaudit_agents::CheckStage::Train));
    assert!(a[0].inspection.is_none());
    assert!(a[0].feedback.as_ref().unwrap().contains("train check"));
    assert_eq!(r.rounds[0].corrections, 1);
    assert_eq!(r.state_sequence(), [Start, Adherence]);
}

#[test]
fn unparseable_proposals_count_as_corrections() {
    struct Chatty(usize);
    impl hyperaudit_agents::ChatBackend for Chatty {
        fn id(&self) -> String {
            "chatty".into()
        }
        fn role(&self) -> Role {
            Role::Creator
        }
        fn complete(&mut self, _: &[hyperaudit_agents::ChatMessage]) -> Result<String, AgentError> {
            self.0 += 1;
            Ok(if self.0 == 1 {
                "A Neo-Hookean model should do.".into()
            } else {
                hyperaudit_agents::mock::Template::TwoTerm.proposal().to_reply()
            })
        }
    }
    let mut cfg = config("good_creator", "oracle_inspector");
    cfg.refinement_rounds = 0;
    let mut inspector = hyperaudit_agents::build_backend(&cfg.inspector, Role::Inspector, &cfg.tolerances).unwrap();
    let r = hyperaudit_agents::run_pipeline(&cfg, &data(), &mut Chatty(0), inspector.as_mut()).unwrap();
    let a = &r.rounds[0].attempts;
    assert!(a[0].parse_error.as_ref().unwrap().contains("fenced"));
    assert_eq!(r.rounds[0].corrections, 1);
    assert_eq!(r.exports().count(), 1);
}

#[test]
fn transcript_has_one_record_per_call() {
    let mut cfg = config("flaky_creator", "oracle_inspector");
    cfg.refinement_rounds = 1;
    let r = run(&cfg);
    let proposals: usize = r.rounds.iter().map(|x| x.attempts.len()).sum();
    let creator_calls = r.transcript.records.iter().filter(|x| x.role == Role::Creator).count();
    assert_eq!(creator_calls, proposals);
    let inspector_calls = r.transcript.records.iter().filter(|x| x.role == Role::Inspector).count();
    assert_eq!(inspector_calls, r.inspections().count());
    let stamps: Vec<u64> = r.transcript.records.iter().map(|x| x.timestamp).collect();
    assert_eq!(stamps, (0..stamps.len() as u64).collect::<Vec<_>>());
}

#[test]
fn refinement_prompt_carries_predictions() {
    let r = run(&config("good_creator", "oracle_inspector"));
    let second_round_prompt = r
        .transcript
        .records
        .iter()
        .find(|x| x.role == Role::Creator && x.round == 1)
        .and_then(|x| x.request.clone())
        .unwrap();
    assert!(second_round_prompt.contains("param\ttarget\tprediction"));
    assert!(second_round_prompt.contains("R2 = "));
}

#[test]
fn config_roundtrip_and_validation() {
    let cfg = config("good_creator", "oracle_inspector");
    let back: PipelineConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(back, cfg);
    let partial: PipelineConfig = serde_json::from_str(r#"{"refinement_rounds": 1}"#).unwrap();
    assert_eq!(partial.max_corrections, 5);
    assert_eq!(partial.violating_export_probability, 0.25);
    let mut bad = cfg.clone();
    bad.violating_export_probability = 1.5;
    assert!(matches!(run_pipeline_with_config(&bad, &data()), Err(AgentError::InvalidConfig(_))));
}

#[test]
fn states_are_verdict_driven() {
    // A blind inspector approves the RawF design, so the state is
    // Adherence even though the model is not objective.
    let mut cfg = config("stubborn_creator", "blind_inspector");
    cfg.refinement_rounds = 0;
    let r = run(&cfg);
    assert_eq!(r.state_sequence(), [PipelineState::Start, PipelineState::Adherence]);
    assert!(!r.best().unwrap().validation.overall);
}
