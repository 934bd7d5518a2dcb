//! Syntactic checks run on every proposal before it is inspected.
//!
//! Stages run in order and the first failure stops the sequence; failures
//! are data carrying a reason the Creator can act on.

use hyperaudit_core::datasets::StressStrainDataset;
use hyperaudit_core::model::WeightSet;
use hyperaudit_core::training::{initialize_weights, predict_curve, train, TrainConfig};
use hyperaudit_core::ConstitutiveModel;
use serde::{Deserialize, Serialize};

use crate::protocol::ModelProposal;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStage {
    Instantiate,
    Train,
    Predict,
    SaveLoad,
}

impl CheckStage {
    pub const ALL: [CheckStage; 4] = [
        CheckStage::Instantiate,
        CheckStage::Train,
        CheckStage::Predict,
        CheckStage::SaveLoad,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckStage::Instantiate => "instantiate",
            CheckStage::Train => "train",
            CheckStage::Predict => "predict",
            CheckStage::SaveLoad => "save_load",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageResult {
    pub stage: CheckStage,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntacticReport {
    pub stages: Vec<StageResult>,
}

impl SyntacticReport {
    pub fn passed(&self) -> bool {
        self.stages.len() == CheckStage::ALL.len() && self.stages.iter().all(|s| s.passed)
    }

    pub fn failed_stage(&self) -> Option<CheckStage> {
        self.stages.iter().find(|s| !s.passed).map(|s| s.stage)
    }

    pub fn reason(&self) -> Option<&str> {
        self.stages.iter().find_map(|s| s.reason.as_deref())
    }
}

/// Model with the proposal's initial weights, or a seeded draw when none
/// are given.
pub fn instantiate(proposal: &ModelProposal, config: &TrainConfig) -> Result<ConstitutiveModel, String> {
    let d = &proposal.descriptor;
    d.validate().map_err(|e| e.to_string())?;
    let weights = match &proposal.initial_weights {
        Some(w) => {
            let mut flat = Vec::with_capacity(2 * w.inner.len());
            let mut at = 0;
            for t in &d.terms {
                flat.extend_from_slice(w.inner.get(at..at + t.neurons).ok_or("initial inner weights too short")?);
                flat.extend_from_slice(w.outer.get(at..at + t.neurons).ok_or("initial outer weights too short")?);
                at += t.neurons;
            }
            if at != w.inner.len() || at != w.outer.len() {
                return Err(format!("descriptor has {at} neurons but initial weights differ in length"));
            }
            WeightSet::from_flat(d, &flat).map_err(|e| e.to_string())?
        }
        None => initialize_weights(d, &config.init, config.seed),
    };
    ConstitutiveModel::new(d.clone(), weights).map_err(|e| e.to_string())
}

/// Instantiate, short training run capped at `epoch_cap`, finite
/// predictions on every mode, and a save/load roundtrip with identical
/// predictions.
pub fn syntactic_checks(
    proposal: &ModelProposal,
    dataset: &StressStrainDataset,
    config: &TrainConfig,
    epoch_cap: usize,
) -> SyntacticReport {
    let mut stages = Vec::with_capacity(4);
    let mut push = |stage, r: Result<(), String>| {
        let passed = r.is_ok();
        stages.push(StageResult {
            stage,
            passed,
            reason: r.err(),
        });
        passed
    };

    let model = instantiate(proposal, config);
    let ok = push(CheckStage::Instantiate, model.as_ref().map(|_| ()).map_err(Clone::clone));
    let (Ok(model), true) = (model, ok) else {
        return SyntacticReport { stages };
    };

    let short = TrainConfig {
        epochs: config.epochs.min(epoch_cap).max(1),
        ..*config
    };
    let trained = train(&model, dataset, &short).map(|(m, _)| m).map_err(|e| e.to_string());
    let Ok(trained) = trained else {
        push(CheckStage::Train, trained.map(|_| ()));
        return SyntacticReport { stages };
    };
    push(CheckStage::Train, Ok(()));

    let mut predictions = Vec::with_capacity(dataset.modes.len());
    let predict = dataset.modes.iter().try_for_each(|m| {
        let p = predict_curve(&trained, m.mode, &m.params()).map_err(|e| format!("{}: {e}", m.mode))?;
        if let Some(i) = p.iter().position(|v| !v.is_finite()) {
            return Err(format!("{}: non-finite prediction at parameter {}", m.mode, m.samples[i].param));
        }
        predictions.push(p);
        Ok(())
    });
    if !push(CheckStage::Predict, predict) {
        return SyntacticReport { stages };
    }

    let roundtrip = ConstitutiveModel::from_json(&trained.to_json())
        .map_err(|e| format!("reload failed: {e}"))
        .and_then(|reloaded| {
            for (m, before) in dataset.modes.iter().zip(&predictions) {
                let after = predict_curve(&reloaded, m.mode, &m.params()).map_err(|e| e.to_string())?;
                let same = before.iter().zip(&after).all(|(a, b)| a.to_bits() == b.to_bits());
                if !same {
                    return Err(format!("{}: predictions changed after reload", m.mode));
                }
            }
            Ok(())
        });
    push(CheckStage::SaveLoad, roundtrip);
    SyntacticReport { stages }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hyperaudit_core::datasets::{generate_synthetic, rubber_protocols, StressUnit};
    use hyperaudit_core::model::fixtures::{four_term_descriptor, reference_material, two_term_descriptor};
    use hyperaudit_core::model::{ActivationKind, FeatureKind, FlatWeights, ModelDescriptor, TermSpec};
    use hyperaudit_core::training::Optimizer;

    fn data() -> StressStrainDataset {
        generate_synthetic(&reference_material(), "mr", StressUnit::MPa, &rubber_protocols()).unwrap()
    }

    #[test]
    fn canonical_proposal_passes() {
        let ds = data();
        for d in [two_term_descriptor(), four_term_descriptor()] {
            let r = syntactic_checks(&ModelProposal::new(d, ""), &ds, &TrainConfig::default(), 200);
            assert!(r.passed(), "{r:?}");
            assert_eq!(r.stages.len(), 4);
        }
    }

    #[test]
    fn empty_descriptor_fails_instantiation() {
        let p = ModelProposal::new(ModelDescriptor::new("empty", vec![]), "");
        let r = syntactic_checks(&p, &data(), &TrainConfig::default(), 200);
        assert_eq!(r.failed_stage(), Some(CheckStage::Instantiate));
        assert_eq!(r.stages.len(), 1);
        assert!(r.reason().unwrap().contains("no terms"));
    }

    #[test]
    fn divergent_config_fails_training() {
        let d = ModelDescriptor::new(
            "diverge",
            vec![TermSpec::new(FeatureKind::I1m3, ActivationKind::Square, 1).free()],
        );
        let mut p = ModelProposal::new(d, "");
        p.train.learning_rate = Some(1e3);
        p.train.optimizer = Some(Optimizer::Sgd);
        let cfg = p.train.apply(&TrainConfig::default());
        let r = syntactic_checks(&p, &data(), &cfg, 200);
        assert_eq!(r.failed_stage(), Some(CheckStage::Train));
        assert!(r.reason().unwrap().contains("non-finite"), "{:?}", r.reason());
    }

    #[test]
    fn initial_weights_are_used() {
        let mut p = ModelProposal::new(two_term_descriptor(), "");
        p.initial_weights = Some(FlatWeights {
            inner: vec![1.0, 1.0],
            outer: vec![0.5, 0.1],
        });
        let m = instantiate(&p, &TrainConfig::default()).unwrap();
        assert_eq!(m.weights().to_flat(), vec![1.0, 0.5, 1.0, 0.1]);
    }
}
