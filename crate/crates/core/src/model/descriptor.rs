use serde::{Deserialize, Serialize};

use super::{ActivationKind, ModelError};

/// Scalar input feature of a network block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureKind {
    /// `relu(I1 − 3)`
    I1m3,
    /// `relu(I2 − 3)`
    I2m3,
    /// Displacement-gradient component `F_ij − δ_ij`, read directly from F.
    /// Not frame-indifferent.
    RawF { row: usize, col: usize },
}

impl FeatureKind {
    pub fn is_invariant(self) -> bool {
        matches!(self, FeatureKind::I1m3 | FeatureKind::I2m3)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightConstraint {
    Nonneg,
    Free,
}

fn default_true() -> bool {
    true
}

/// One network block: `Σ_n w_out[n] · f(w_in[n] · feature)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub feature: FeatureKind,
    pub activation: ActivationKind,
    pub neurons: usize,
    pub weight_constraint: WeightConstraint,
    /// Frozen terms keep their initial weights during training.
    #[serde(default = "default_true")]
    pub trainable: bool,
}

impl TermSpec {
    pub fn new(feature: FeatureKind, activation: ActivationKind, neurons: usize) -> Self {
        Self {
            feature,
            activation,
            neurons,
            weight_constraint: WeightConstraint::Nonneg,
            trainable: true,
        }
    }

    pub fn free(mut self) -> Self {
        self.weight_constraint = WeightConstraint::Free;
        self
    }

    pub fn frozen(mut self) -> Self {
        self.trainable = false;
        self
    }
}

/// Non-potential stress term added after the pressure is eliminated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StressAugmentation {
    #[default]
    None,
    /// `ΔP12 = α F21`, `ΔP21 = −α F12`.
    Skew { alpha: f64 },
    /// `ΔP11 = value` at every state.
    Offset { value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct ModelMetadata {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
}

/// Declarative description of a constitutive network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub terms: Vec<TermSpec>,
    pub normalize_energy: bool,
    #[serde(default)]
    pub stress_augmentation: StressAugmentation,
    #[serde(default)]
    pub metadata: ModelMetadata,
}

impl ModelDescriptor {
    pub fn new(name: impl Into<String>, terms: Vec<TermSpec>) -> Self {
        Self {
            terms,
            normalize_energy: true,
            stress_augmentation: StressAugmentation::None,
            metadata: ModelMetadata {
                name: name.into(),
                seed: 0,
            },
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let invalid = |msg: String| Err(ModelError::InvalidDescriptor(msg));
        if self.terms.is_empty() {
            return invalid("descriptor has no terms".into());
        }
        for (i, t) in self.terms.iter().enumerate() {
            if t.neurons == 0 {
                return invalid(format!("term {i} has zero neurons"));
            }
            if let FeatureKind::RawF { row, col } = t.feature {
                if row > 2 || col > 2 {
                    return invalid(format!("term {i}: RawF index ({row}, {col}) out of range"));
                }
            }
        }
        match self.stress_augmentation {
            StressAugmentation::Skew { alpha: v } | StressAugmentation::Offset { value: v }
                if !v.is_finite() =>
            {
                invalid("stress augmentation coefficient is not finite".into())
            }
            _ => Ok(()),
        }
    }

    /// Convex normalizing activations, non-negative weights, invariant
    /// features, energy normalization and no stress augmentation.
    pub fn is_canonical(&self) -> bool {
        self.validate().is_ok()
            && self.normalize_energy
            && self.stress_augmentation == StressAugmentation::None
            && self.terms.iter().all(|t| {
                t.feature.is_invariant()
                    && t.activation.is_normalizing_convex()
                    && t.weight_constraint == WeightConstraint::Nonneg
            })
    }

    pub fn total_neurons(&self) -> usize {
        self.terms.iter().map(|t| t.neurons).sum()
    }

    /// Number of scalar weights (inner plus outer).
    pub fn parameter_count(&self) -> usize {
        2 * self.total_neurons()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_names() {
        assert_eq!(serde_json::to_string(&FeatureKind::I1m3).unwrap(), "\"I1m3\"");
        assert_eq!(
            serde_json::to_string(&FeatureKind::RawF { row: 2, col: 2 }).unwrap(),
            r#"{"RawF":{"row":2,"col":2}}"#
        );
    }

    #[test]
    fn validation_rejects_bad_shapes() {
        let empty = ModelDescriptor::new("x", vec![]);
        assert!(empty.validate().is_err());
        let zero = ModelDescriptor::new(
            "x",
            vec![TermSpec::new(FeatureKind::I1m3, ActivationKind::Linear, 0)],
        );
        assert!(zero.validate().is_err());
        let raw = ModelDescriptor::new(
            "x",
            vec![TermSpec::new(FeatureKind::RawF { row: 3, col: 0 }, ActivationKind::Linear, 1)],
        );
        assert!(raw.validate().is_err());
    }

    #[test]
    fn canonical_classification() {
        let mut d = ModelDescriptor::new(
            "c",
            vec![
                TermSpec::new(FeatureKind::I1m3, ActivationKind::SoftplusShifted, 2),
                TermSpec::new(FeatureKind::I2m3, ActivationKind::ExpM1my, 1),
            ],
        );
        assert!(d.is_canonical());
        d.terms[0].weight_constraint = WeightConstraint::Free;
        assert!(!d.is_canonical());
        d.terms[0].weight_constraint = WeightConstraint::Nonneg;
        d.stress_augmentation = StressAugmentation::Skew { alpha: 0.1 };
        assert!(!d.is_canonical());
        d.stress_augmentation = StressAugmentation::None;
        d.normalize_energy = false;
        assert!(!d.is_canonical());
    }

    #[test]
    fn trainable_defaults_to_true() {
        let t: TermSpec = serde_json::from_str(
            r#"{"feature":"I2m3","activation":"square","neurons":2,"weight_constraint":"nonneg"}"#,
        )
        .unwrap();
        assert!(t.trainable);
    }
}
