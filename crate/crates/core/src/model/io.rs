use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ConstitutiveModel, ModelDescriptor, ModelError, WeightSet};

pub const MODEL_FILE_VERSION: &str = "1";

/// Flat weight arrays in term order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatWeights {
    pub inner: Vec<f64>,
    pub outer: Vec<f64>,
}

/// On-disk model document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: String,
    pub descriptor: ModelDescriptor,
    pub weights: FlatWeights,
}

impl ModelFile {
    pub fn from_model(model: &ConstitutiveModel<f64>) -> Self {
        let (inner, outer) = model
            .weights()
            .terms
            .iter()
            .fold((Vec::new(), Vec::new()), |(mut i, mut o), w| {
                i.extend_from_slice(&w.inner);
                o.extend_from_slice(&w.outer);
                (i, o)
            });
        Self {
            version: MODEL_FILE_VERSION.to_string(),
            descriptor: model.descriptor().clone(),
            weights: FlatWeights { inner, outer },
        }
    }

    pub fn into_model(self) -> Result<ConstitutiveModel<f64>, ModelError> {
        if self.version != MODEL_FILE_VERSION {
            return Err(ModelError::SchemaMismatch(format!(
                "unsupported version `{}` (expected `{MODEL_FILE_VERSION}`)",
                self.version
            )));
        }
        let n = self.descriptor.total_neurons();
        if self.weights.inner.len() != n || self.weights.outer.len() != n {
            return Err(ModelError::SchemaMismatch(format!(
                "descriptor has {n} neurons but file carries {}/{} weights",
                self.weights.inner.len(),
                self.weights.outer.len()
            )));
        }
        let mut weights = WeightSet::<f64>::zeros(&self.descriptor);
        let mut at = 0;
        for w in weights.terms.iter_mut() {
            let len = w.inner.len();
            w.inner.copy_from_slice(&self.weights.inner[at..at + len]);
            w.outer.copy_from_slice(&self.weights.outer[at..at + len]);
            at += len;
        }
        ConstitutiveModel::new(self.descriptor, weights).map_err(|e| match e {
            ModelError::InvalidDescriptor(m) => ModelError::SchemaMismatch(m),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::SchemaMismatch(e.to_string()))
    }
}

impl ConstitutiveModel<f64> {
    /// Serialized model document. Floats use shortest round-trip formatting,
    /// so a reload reproduces every weight bit for bit.
    pub fn to_json(&self) -> String {
        ModelFile::from_model(self).to_json()
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        ModelFile::from_json(text)?.into_model()
    }
}

pub fn save_model(model: &ConstitutiveModel<f64>, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let mut text = model.to_json();
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ConstitutiveModel<f64>, ModelError> {
    let text = fs::read_to_string(path)?;
    ConstitutiveModel::from_json(&text)
}
