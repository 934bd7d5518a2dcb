//! Verdict-driven state transitions and ground-truth confusion tables.

use std::collections::BTreeMap;

use hyperaudit_core::validators::ConstraintId;
use serde::{Deserialize, Serialize};

use crate::pipeline::PipelineRun;
use crate::protocol::{InspectorVerdict, Status};

/// Pipeline state after an Inspector verdict. Defined by the verdict alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineState {
    Start,
    NewViolation,
    RepeatedViolation,
    Adherence,
}

impl PipelineState {
    pub const ALL: [PipelineState; 4] = [
        PipelineState::Start,
        PipelineState::NewViolation,
        PipelineState::RepeatedViolation,
        PipelineState::Adherence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PipelineState::Start => "start",
            PipelineState::NewViolation => "new_violation",
            PipelineState::RepeatedViolation => "repeated_violation",
            PipelineState::Adherence => "adherence",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub from: PipelineState,
    pub to: PipelineState,
}

/// Adherence when nothing is violated; RepeatedViolation when a constraint
/// violated now was also violated in `previous`; NewViolation otherwise.
pub fn classify_transition(previous: Option<&InspectorVerdict>, current: &InspectorVerdict) -> PipelineState {
    let now = current.violated();
    if now.is_empty() {
        return PipelineState::Adherence;
    }
    let repeated = previous.is_some_and(|p| now.iter().any(|id| p.verdicts.get(id).is_some_and(|j| j.status == Status::Violated)));
    if repeated {
        PipelineState::RepeatedViolation
    } else {
        PipelineState::NewViolation
    }
}

/// Labeled verdicts of one flag category.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryCounts {
    /// Verdicts in the category, labeled or not.
    pub flagged: usize,
    /// Verdicts checked against the validators.
    pub labeled: usize,
    pub truly_adhering: usize,
    pub truly_violating: usize,
}

impl CategoryCounts {
    fn add(&mut self, o: &CategoryCounts) {
        self.flagged += o.flagged;
        self.labeled += o.labeled;
        self.truly_adhering += o.truly_adhering;
        self.truly_violating += o.truly_violating;
    }

    pub fn truly_adhering_fraction(&self) -> Option<f64> {
        (self.labeled > 0).then(|| self.truly_adhering as f64 / self.labeled as f64)
    }

    pub fn truly_violating_fraction(&self) -> Option<f64> {
        (self.labeled > 0).then(|| self.truly_violating as f64 / self.labeled as f64)
    }
}

/// Flagged versus actual outcome of one constraint over labeled verdicts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintCounts {
    pub flagged_violated: usize,
    pub actually_violated: usize,
    pub both_violated: usize,
    pub labeled: usize,
}

impl ConstraintCounts {
    fn add(&mut self, o: &ConstraintCounts) {
        self.flagged_violated += o.flagged_violated;
        self.actually_violated += o.actually_violated;
        self.both_violated += o.both_violated;
        self.labeled += o.labeled;
    }
}

/// Agreement between Inspector flags and validator ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfusionSummary {
    pub flagged_adhering: CategoryCounts,
    pub flagged_violating: CategoryCounts,
    /// Keyed by all nine constraint ids.
    pub per_constraint: BTreeMap<ConstraintId, ConstraintCounts>,
}

impl Default for ConfusionSummary {
    fn default() -> Self {
        Self {
            flagged_adhering: CategoryCounts::default(),
            flagged_violating: CategoryCounts::default(),
            per_constraint: ConstraintId::ALL.into_iter().map(|id| (id, ConstraintCounts::default())).collect(),
        }
    }
}

impl ConfusionSummary {
    /// Truly adhering share of flagged-adhering models.
    pub fn adhering_accuracy(&self) -> Option<f64> {
        self.flagged_adhering.truly_adhering_fraction()
    }

    /// Truly violating share of labeled flagged-violating models.
    pub fn violating_accuracy(&self) -> Option<f64> {
        self.flagged_violating.truly_violating_fraction()
    }

    pub fn merge(&mut self, other: &ConfusionSummary) {
        self.flagged_adhering.add(&other.flagged_adhering);
        self.flagged_violating.add(&other.flagged_violating);
        for (id, c) in &other.per_constraint {
            self.per_constraint.entry(*id).or_default().add(c);
        }
    }

    pub fn aggregate<'a>(parts: impl IntoIterator<Item = &'a ConfusionSummary>) -> Self {
        let mut out = Self::default();
        for p in parts {
            out.merge(p);
        }
        out
    }
}

/// Tabulates the validator labels recorded during `run`: every exported
/// model and the sampled subset of flagged-violating ones.
pub fn ground_truth_label(run: &PipelineRun) -> ConfusionSummary {
    let mut out = ConfusionSummary::default();
    for insp in run.inspections() {
        let adhering = insp.verdict.all_fulfilled();
        let cat = if adhering {
            &mut out.flagged_adhering
        } else {
            &mut out.flagged_violating
        };
        cat.flagged += 1;
        let Some(truth) = &insp.ground_truth else {
            continue;
        };
        cat.labeled += 1;
        if truth.overall {
            cat.truly_adhering += 1;
        } else {
            cat.truly_violating += 1;
        }
        for v in &truth.verdicts {
            let flagged = insp.verdict.status(v.id) == Status::Violated;
            let c = out.per_constraint.entry(v.id).or_default();
            c.labeled += 1;
            c.flagged_violated += flagged as usize;
            c.actually_violated += !v.passed as usize;
            c.both_violated += (flagged && !v.passed) as usize;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::Judgement;

    fn verdict(violated: &[ConstraintId]) -> InspectorVerdict {
        InspectorVerdict {
            verdicts: ConstraintId::ALL
                .into_iter()
                .map(|id| {
                    let status = if violated.contains(&id) {
                        Status::Violated
                    } else {
                        Status::Fulfilled
                    };
                    (
                        id,
                        Judgement {
                            status,
                            justification: String::new(),
                        },
                    )
                })
                .collect(),
            tool_calls: vec![],
        }
    }

    #[test]
    fn transitions() {
        use ConstraintId::*;
        assert_eq!(classify_transition(None, &verdict(&[])), PipelineState::Adherence);
        assert_eq!(classify_transition(None, &verdict(&[Ellipticity])), PipelineState::NewViolation);
        assert_eq!(
            classify_transition(Some(&verdict(&[Ellipticity])), &verdict(&[Ellipticity])),
            PipelineState::RepeatedViolation
        );
        assert_eq!(
            classify_transition(Some(&verdict(&[Ellipticity])), &verdict(&[MaterialSymmetry])),
            PipelineState::NewViolation
        );
        assert_eq!(
            classify_transition(Some(&verdict(&[Ellipticity, Growth])), &verdict(&[Growth, Objectivity])),
            PipelineState::RepeatedViolation
        );
        assert_eq!(classify_transition(Some(&verdict(&[Growth])), &verdict(&[])), PipelineState::Adherence);
    }

    #[test]
    fn default_summary_covers_nine_ids() {
        let s = ConfusionSummary::default();
        assert_eq!(s.per_constraint.keys().copied().collect::<Vec<_>>(), ConstraintId::ALL);
        assert_eq!(s.adhering_accuracy(), None);
    }

    #[test]
    fn merge_adds_counts() {
        let mut a = ConfusionSummary::default();
        a.flagged_adhering = CategoryCounts {
            flagged: 9,
            labeled: 9,
            truly_adhering: 9,
            truly_violating: 0,
        };
        let mut b = ConfusionSummary::default();
        b.flagged_adhering = CategoryCounts {
            flagged: 1,
            labeled: 1,
            truly_adhering: 0,
            truly_violating: 1,
        };
        let m = ConfusionSummary::aggregate([&a, &b]);
        assert_eq!(m.adhering_accuracy(), Some(0.9));
    }
}
