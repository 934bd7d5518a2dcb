//! Finite-deformation kinematics for incompressible, isotropic materials.
//!
//! Everything here is a pure function of its inputs. States are represented
//! by unimodular deformation gradients; the plane-strain constructor places a
//! 2×2 in-plane block in the upper-left corner and chooses `F33` so that
//! `det F = 1`.

mod sampling;
mod tensor;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub use sampling::{
    base_sample_set, ellipticity_grid, fibonacci_hemisphere, fibonacci_hemisphere_with_phase,
    in_plane_rotation, rotation_sets, rotation_xyz, DirectionSet, RotationSet, ANGLE_TRIPLES,
    ELLIPTICITY_DIRECTION_PHASE_B,
};
pub use tensor::Tensor2;

/// Below this magnitude the in-plane 2×2 block is treated as singular.
pub const PLANE_BLOCK_MIN_DET: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MechanicsError {
    #[error("in-plane block is singular (det = {det:e})")]
    SingularPlaneBlock { det: f64 },
    #[error("stretch must be positive, got {stretch}")]
    NonPositiveStretch { stretch: f64 },
}

/// Homogeneous loading protocol. Compression is uniaxial loading with λ < 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadingMode {
    UniaxialTension,
    UniaxialCompression,
    Equibiaxial,
    PureShear,
    SimpleShear,
}

impl LoadingMode {
    pub const ALL: [LoadingMode; 5] = [
        LoadingMode::UniaxialTension,
        LoadingMode::UniaxialCompression,
        LoadingMode::Equibiaxial,
        LoadingMode::PureShear,
        LoadingMode::SimpleShear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LoadingMode::UniaxialTension => "uniaxial_tension",
            LoadingMode::UniaxialCompression => "uniaxial_compression",
            LoadingMode::Equibiaxial => "equibiaxial",
            LoadingMode::PureShear => "pure_shear",
            LoadingMode::SimpleShear => "simple_shear",
        }
    }

    pub fn is_stretch_controlled(self) -> bool {
        !matches!(self, LoadingMode::SimpleShear)
    }

    /// Stress component `(i, j)` of P reported for this protocol.
    pub fn measured_component(self) -> (usize, usize) {
        match self {
            LoadingMode::SimpleShear => (0, 1),
            _ => (0, 0),
        }
    }

    /// Parameter value of the undeformed state (λ = 1 or γ = 0).
    pub fn reference_param(self) -> f64 {
        if self.is_stretch_controlled() {
            1.0
        } else {
            0.0
        }
    }
}

impl std::fmt::Display for LoadingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LoadingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LoadingMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown loading mode `{s}`"))
    }
}

/// First and second principal invariants of `C = FᵀF`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantPair<T> {
    pub i1: T,
    pub i2: T,
}

impl<T: Scalar> InvariantPair<T> {
    /// Invariants of the reference configuration.
    pub fn reference() -> Self {
        let three = T::lit(3.0);
        Self { i1: three, i2: three }
    }
}

/// Deformation gradient `F`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeformationGradient<T> {
    f: Tensor2<T>,
}

impl<T: Scalar> DeformationGradient<T> {
    pub fn identity() -> Self {
        Self {
            f: Tensor2::identity(),
        }
    }

    /// Wraps an arbitrary tensor (used for rotated states `QF`, `FQᵀ`).
    pub fn from_tensor(f: Tensor2<T>) -> Self {
        Self { f }
    }

    /// Plane-strain state with `F33 = 1 / (F11 F22 − F12 F21)`.
    pub fn plane_strain(f11: T, f12: T, f21: T, f22: T) -> Result<Self, MechanicsError> {
        let det2 = f11 * f22 - f12 * f21;
        if !(det2.abs() > T::lit(PLANE_BLOCK_MIN_DET)) {
            return Err(MechanicsError::SingularPlaneBlock {
                det: det2.to_f64_lossy(),
            });
        }
        let z = T::zero();
        Ok(Self {
            f: Tensor2::from_rows([[f11, f12, z], [f21, f22, z], [z, z, T::one() / det2]]),
        })
    }

    /// Homogeneous state of a loading protocol at stretch λ or shear γ.
    pub fn from_mode(mode: LoadingMode, param: T) -> Result<Self, MechanicsError> {
        let one = T::one();
        let z = T::zero();
        if mode.is_stretch_controlled() && !(param > z) {
            return Err(MechanicsError::NonPositiveStretch {
                stretch: param.to_f64_lossy(),
            });
        }
        match mode {
            LoadingMode::UniaxialTension | LoadingMode::UniaxialCompression => {
                Self::plane_strain(param, z, z, param.powf(T::lit(-0.5)))
            }
            LoadingMode::Equibiaxial => Self::plane_strain(param, z, z, param),
            LoadingMode::PureShear => Self::plane_strain(param, z, z, one),
            LoadingMode::SimpleShear => Self::plane_strain(one, param, z, one),
        }
    }

    pub fn tensor(&self) -> &Tensor2<T> {
        &self.f
    }

    /// In-plane block `(F11, F12, F21, F22)`.
    pub fn plane_block(&self) -> [T; 4] {
        [self.f[(0, 0)], self.f[(0, 1)], self.f[(1, 0)], self.f[(1, 1)]]
    }

    pub fn jacobian(&self) -> T {
        self.f.det()
    }

    pub fn right_cauchy_green(&self) -> Tensor2<T> {
        self.f.transpose() * self.f
    }

    pub fn left_cauchy_green(&self) -> Tensor2<T> {
        self.f * self.f.transpose()
    }

    pub fn inverse_transpose(&self) -> Option<Tensor2<T>> {
        self.f.inverse().map(|inv| inv.transpose())
    }

    pub fn invariants(&self) -> InvariantPair<T> {
        let c = self.right_cauchy_green();
        let i1 = c.trace();
        let i2 = T::lit(0.5) * (i1 * i1 - (c * c).trace());
        InvariantPair { i1, i2 }
    }

    /// `QF`: superposed rigid rotation of the current configuration.
    pub fn rotated(&self, q: &Tensor2<T>) -> Self {
        Self { f: *q * self.f }
    }

    /// `FQᵀ`: rotation or reflection of the reference configuration.
    pub fn reference_transformed(&self, q: &Tensor2<T>) -> Self {
        Self {
            f: self.f * q.transpose(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> DeformationGradient<U> {
        DeformationGradient { f: self.f.cast() }
    }
}
