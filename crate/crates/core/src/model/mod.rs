//! Invariant-based constitutive networks and their exact evaluation.
//!
//! A model is a [`ModelDescriptor`] (which blocks exist, which activation and
//! feature each uses, sign constraints) plus a [`WeightSet`]. The strain
//! energy is the sum of the blocks, optionally shifted so that `Ψ(I) = 0`.
//! Stress and the elasticity tensor are obtained by exact chain rule through
//! the invariants; the hydrostatic pressure is eliminated with `P33 = 0`.

mod activation;
mod descriptor;
mod elasticity;
pub mod fixtures;
mod io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mechanics::{DeformationGradient, InvariantPair, Tensor2};
use crate::scalar::Scalar;

pub use activation::{ActivationKind, ActivationValue};
pub use descriptor::{
    FeatureKind, ModelDescriptor, ModelMetadata, StressAugmentation, TermSpec, WeightConstraint,
};
pub use elasticity::{rank_one_form, ElasticityTensor};
pub use io::{load_model, save_model, FlatWeights, ModelFile, MODEL_FILE_VERSION};

/// Guard on `|(F⁻ᵀ)₃₃|` when solving for the pressure.
pub const PRESSURE_DENOMINATOR_GUARD: f64 = 1e-8;

/// Invariant features use derivative 1 down to `I − 3 = −FEATURE_KINK_SLACK`
/// to absorb rounding on admissible states.
pub const FEATURE_KINK_SLACK: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("weights do not match descriptor: {0}")]
    WeightShape(String),
    #[error("pressure denominator |(F^-T)_33| = {value:e} below guard")]
    DegeneratePressureDenominator { value: f64 },
    #[error("deformation gradient is singular")]
    SingularDeformation,
    #[error("model file I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file schema mismatch: {0}")]
    SchemaMismatch(String),
}

/// Inner and outer weights of one block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermWeights<T> {
    pub inner: Vec<T>,
    pub outer: Vec<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSet<T> {
    pub terms: Vec<TermWeights<T>>,
}

impl<T: Scalar> WeightSet<T> {
    pub fn zeros(descriptor: &ModelDescriptor) -> Self {
        Self {
            terms: descriptor
                .terms
                .iter()
                .map(|t| TermWeights {
                    inner: vec![T::zero(); t.neurons],
                    outer: vec![T::zero(); t.neurons],
                })
                .collect(),
        }
    }

    /// Same value for every inner and every outer weight.
    pub fn uniform(descriptor: &ModelDescriptor, inner: T, outer: T) -> Self {
        Self {
            terms: descriptor
                .terms
                .iter()
                .map(|t| TermWeights {
                    inner: vec![inner; t.neurons],
                    outer: vec![outer; t.neurons],
                })
                .collect(),
        }
    }

    pub fn check_shape(&self, descriptor: &ModelDescriptor) -> Result<(), ModelError> {
        if self.terms.len() != descriptor.terms.len() {
            return Err(ModelError::WeightShape(format!(
                "{} weight blocks for {} terms",
                self.terms.len(),
                descriptor.terms.len()
            )));
        }
        for (i, (w, t)) in self.terms.iter().zip(&descriptor.terms).enumerate() {
            if w.inner.len() != t.neurons || w.outer.len() != t.neurons {
                return Err(ModelError::WeightShape(format!(
                    "term {i}: expected {} neurons, got {}/{}",
                    t.neurons,
                    w.inner.len(),
                    w.outer.len()
                )));
            }
        }
        Ok(())
    }

    /// Clamps sign-constrained weights to `≥ 0`.
    pub fn project(&mut self, descriptor: &ModelDescriptor) {
        for (w, t) in self.terms.iter_mut().zip(&descriptor.terms) {
            if t.weight_constraint == WeightConstraint::Nonneg {
                for v in w.inner.iter_mut().chain(w.outer.iter_mut()) {
                    *v = v.max(T::zero());
                }
            }
        }
    }

    pub fn satisfies_constraints(&self, descriptor: &ModelDescriptor) -> bool {
        self.terms.iter().zip(&descriptor.terms).all(|(w, t)| {
            t.weight_constraint == WeightConstraint::Free
                || w.inner.iter().chain(&w.outer).all(|v| *v >= T::zero())
        })
    }

    /// All weights in term order, inner block then outer block per term.
    pub fn to_flat(&self) -> Vec<T> {
        let mut out = Vec::new();
        for w in &self.terms {
            out.extend_from_slice(&w.inner);
            out.extend_from_slice(&w.outer);
        }
        out
    }

    /// Inverse of [`WeightSet::to_flat`] for the given descriptor.
    pub fn from_flat(descriptor: &ModelDescriptor, flat: &[T]) -> Result<Self, ModelError> {
        if flat.len() != descriptor.parameter_count() {
            return Err(ModelError::WeightShape(format!(
                "expected {} weights, got {}",
                descriptor.parameter_count(),
                flat.len()
            )));
        }
        let mut at = 0;
        let terms = descriptor
            .terms
            .iter()
            .map(|t| {
                let inner = flat[at..at + t.neurons].to_vec();
                let outer = flat[at + t.neurons..at + 2 * t.neurons].to_vec();
                at += 2 * t.neurons;
                TermWeights { inner, outer }
            })
            .collect();
        Ok(Self { terms })
    }

    pub fn is_finite(&self) -> bool {
        self.terms
            .iter()
            .all(|w| w.inner.iter().chain(&w.outer).all(|v| v.is_finite()))
    }

    pub fn cast<U: Scalar>(&self) -> WeightSet<U> {
        WeightSet {
            terms: self
                .terms
                .iter()
                .map(|w| TermWeights {
                    inner: w.inner.iter().map(|v| U::lit(v.to_f64_lossy())).collect(),
                    outer: w.outer.iter().map(|v| U::lit(v.to_f64_lossy())).collect(),
                })
                .collect(),
        }
    }
}

/// `ψ` and its partial derivatives with respect to `(I1, I2)`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct PsiDerivatives<T> {
    pub psi: T,
    pub d1: T,
    pub d2: T,
    pub d11: T,
    pub d12: T,
    pub d22: T,
}

/// Energy, stress and pressure at one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StressResponse<T> {
    pub psi: T,
    pub piola: Tensor2<T>,
    pub pressure: T,
}

/// Block energy and its first two derivatives with respect to the feature.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct BlockValue<T> {
    pub e: T,
    pub de: T,
    pub d2e: T,
}

/// Feature value and whether its derivative passes through the relu kink.
#[derive(Clone, Copy, Debug)]
pub(crate) struct FeatureValue<T> {
    pub x: T,
    pub active: bool,
}

/// Per-state kinematic quantities shared by all blocks.
pub(crate) struct Kinematics<T> {
    pub f: Tensor2<T>,
    pub c: Tensor2<T>,
    pub inv: InvariantPair<T>,
}

impl<T: Scalar> Kinematics<T> {
    pub fn new(f: &DeformationGradient<T>) -> Self {
        let c = f.right_cauchy_green();
        Self {
            f: *f.tensor(),
            c,
            inv: f.invariants(),
        }
    }

    pub fn feature(&self, kind: FeatureKind) -> FeatureValue<T> {
        let kink = |i: T| {
            let x = i - T::lit(3.0);
            FeatureValue {
                x: x.max(T::zero()),
                active: x >= -T::lit(FEATURE_KINK_SLACK),
            }
        };
        match kind {
            FeatureKind::I1m3 => kink(self.inv.i1),
            FeatureKind::I2m3 => kink(self.inv.i2),
            FeatureKind::RawF { row, col } => FeatureValue {
                x: self.f[(row, col)] - if row == col { T::one() } else { T::zero() },
                active: true,
            },
        }
    }

    /// `∂I1/∂F = 2F`.
    pub fn d_i1(&self) -> Tensor2<T> {
        self.f.scale(T::lit(2.0))
    }

    /// `∂I2/∂F = 2(I1 F − F C)`.
    pub fn d_i2(&self) -> Tensor2<T> {
        (self.f.scale(self.inv.i1) - self.f * self.c).scale(T::lit(2.0))
    }

    /// Gradient of a feature with respect to F, ignoring the kink.
    pub fn feature_gradient(&self, kind: FeatureKind) -> Tensor2<T> {
        match kind {
            FeatureKind::I1m3 => self.d_i1(),
            FeatureKind::I2m3 => self.d_i2(),
            FeatureKind::RawF { row, col } => Tensor2::unit(row, col),
        }
    }
}

/// Constitutive network: descriptor plus weights.
///
/// Evaluation is stateless; every method is a pure function of the model and
/// its arguments.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstitutiveModel<T> {
    descriptor: ModelDescriptor,
    weights: WeightSet<T>,
}

impl<T: Scalar> ConstitutiveModel<T> {
    pub fn new(descriptor: ModelDescriptor, weights: WeightSet<T>) -> Result<Self, ModelError> {
        descriptor.validate()?;
        weights.check_shape(&descriptor)?;
        Ok(Self {
            descriptor,
            weights,
        })
    }

    pub fn descriptor(&self) -> &ModelDescriptor {
        &self.descriptor
    }

    pub fn weights(&self) -> &WeightSet<T> {
        &self.weights
    }

    /// Replaces the weights and re-applies the sign constraints.
    pub fn set_weights(&mut self, weights: WeightSet<T>) -> Result<(), ModelError> {
        weights.check_shape(&self.descriptor)?;
        self.weights = weights;
        self.weights.project(&self.descriptor);
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.descriptor.metadata.name
    }

    pub(crate) fn block(&self, term: usize, x: T) -> BlockValue<T> {
        let spec = &self.descriptor.terms[term];
        let w = &self.weights.terms[term];
        let mut out = BlockValue::<T>::default();
        for (&wi, &wo) in w.inner.iter().zip(&w.outer) {
            let a = spec.activation.eval(wi * x);
            out.e = out.e + wo * a.f;
            out.de = out.de + wo * a.df * wi;
            out.d2e = out.d2e + wo * a.d2f * wi * wi;
        }
        out
    }

    /// Energy subtracted for normalization: the raw energy at `F = I`.
    pub fn energy_offset(&self) -> T {
        if !self.descriptor.normalize_energy {
            return T::zero();
        }
        (0..self.descriptor.terms.len())
            .map(|t| self.block(t, T::zero()).e)
            .fold(T::zero(), |a, b| a + b)
    }

    /// Un-normalized energy and its `(I1, I2)` partials. Blocks with
    /// [`FeatureKind::RawF`] do not depend on the invariants and are skipped.
    pub fn psi_derivs(&self, inv: &InvariantPair<T>) -> PsiDerivatives<T> {
        let mut out = PsiDerivatives::<T>::default();
        for (t, spec) in self.descriptor.terms.iter().enumerate() {
            let i = match spec.feature {
                FeatureKind::I1m3 => inv.i1,
                FeatureKind::I2m3 => inv.i2,
                FeatureKind::RawF { .. } => continue,
            };
            let x = i - T::lit(3.0);
            let active = x >= -T::lit(FEATURE_KINK_SLACK);
            let b = self.block(t, x.max(T::zero()));
            out.psi = out.psi + b.e;
            if !active {
                continue;
            }
            match spec.feature {
                FeatureKind::I1m3 => {
                    out.d1 = out.d1 + b.de;
                    out.d11 = out.d11 + b.d2e;
                }
                _ => {
                    out.d2 = out.d2 + b.de;
                    out.d22 = out.d22 + b.d2e;
                }
            }
        }
        out
    }

    pub(crate) fn psi_with(&self, k: &Kinematics<T>) -> T {
        let raw = self
            .descriptor
            .terms
            .iter()
            .enumerate()
            .map(|(t, spec)| self.block(t, k.feature(spec.feature).x).e)
            .fold(T::zero(), |a, b| a + b);
        raw - self.energy_offset()
    }

    /// Strain-energy density.
    pub fn psi(&self, f: &DeformationGradient<T>) -> T {
        self.psi_with(&Kinematics::new(f))
    }

    /// `∂Ψ/∂F` before pressure elimination.
    pub fn isochoric_stress(&self, f: &DeformationGradient<T>) -> Tensor2<T> {
        let k = Kinematics::new(f);
        let mut p = Tensor2::zeros();
        for (t, spec) in self.descriptor.terms.iter().enumerate() {
            let feat = k.feature(spec.feature);
            if !feat.active {
                continue;
            }
            let de = self.block(t, feat.x).de;
            p = p + k.feature_gradient(spec.feature).scale(de);
        }
        p
    }

    fn augmentation(&self, f: &Tensor2<T>) -> Tensor2<T> {
        let mut d = Tensor2::zeros();
        match self.descriptor.stress_augmentation {
            StressAugmentation::None => {}
            StressAugmentation::Skew { alpha } => {
                let a = T::lit(alpha);
                d[(0, 1)] = a * f[(1, 0)];
                d[(1, 0)] = -a * f[(0, 1)];
            }
            StressAugmentation::Offset { value } => d[(0, 0)] = T::lit(value),
        }
        d
    }

    /// `F⁻ᵀ` and its guarded `(3,3)` entry.
    pub(crate) fn pressure_basis(
        f: &DeformationGradient<T>,
    ) -> Result<(Tensor2<T>, T), ModelError> {
        let finv_t = f.inverse_transpose().ok_or(ModelError::SingularDeformation)?;
        let den = finv_t[(2, 2)];
        if !(den.abs() >= T::lit(PRESSURE_DENOMINATOR_GUARD)) {
            return Err(ModelError::DegeneratePressureDenominator {
                value: den.to_f64_lossy(),
            });
        }
        Ok((finv_t, den))
    }

    /// Energy, first Piola–Kirchhoff stress with `P33 = 0`, and pressure.
    pub fn stress_response(
        &self,
        f: &DeformationGradient<T>,
    ) -> Result<StressResponse<T>, ModelError> {
        let (finv_t, den) = Self::pressure_basis(f)?;
        let p_iso = self.isochoric_stress(f);
        let pressure = p_iso[(2, 2)] / den;
        let piola = p_iso - finv_t.scale(pressure) + self.augmentation(f.tensor());
        Ok(StressResponse {
            psi: self.psi(f),
            piola,
            pressure,
        })
    }

    /// First Piola–Kirchhoff stress `P = ∂Ψ/∂F − p F⁻ᵀ` with `P33 = 0`.
    pub fn piola_stress(&self, f: &DeformationGradient<T>) -> Result<Tensor2<T>, ModelError> {
        self.stress_response(f).map(|r| r.piola)
    }

    /// Cauchy stress `σ = P Fᵀ` (J = 1).
    pub fn cauchy_stress(&self, f: &DeformationGradient<T>) -> Result<Tensor2<T>, ModelError> {
        Ok(self.piola_stress(f)? * f.tensor().transpose())
    }

    /// `A_ijkl = ∂²Ψ/∂F_ij∂F_kl` of the energy alone (no pressure term).
    pub fn elasticity_tensor(&self, f: &DeformationGradient<T>) -> ElasticityTensor<T> {
        elasticity::assemble(self, &Kinematics::new(f))
    }

    pub fn cast<U: Scalar>(&self) -> ConstitutiveModel<U> {
        ConstitutiveModel {
            descriptor: self.descriptor.clone(),
            weights: self.weights.cast(),
        }
    }
}
