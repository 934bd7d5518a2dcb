//! Numerical workbench for invariant-based incompressible hyperelastic
//! constitutive networks: kinematics, exact energy/stress/elasticity
//! evaluation, training, benchmark datasets and a sampling-based audit of
//! nine physical admissibility constraints.
//!
//! The kinematics and model layers are generic over [`Scalar`] (`f32`,
//! `f64`); the aliases below fix them to `f64`, which is what the training,
//! validation and dataset layers use.

pub mod datasets;
pub mod mechanics;
pub mod model;
pub mod scalar;
pub mod training;
pub mod validators;

pub use mechanics::LoadingMode;
pub use scalar::Scalar;

pub type Tensor2 = mechanics::Tensor2<f64>;
pub type DeformationGradient = mechanics::DeformationGradient<f64>;
pub type InvariantPair = mechanics::InvariantPair<f64>;
pub type RotationSet = mechanics::RotationSet<f64>;
pub type DirectionSet = mechanics::DirectionSet<f64>;
pub type ConstitutiveModel = model::ConstitutiveModel<f64>;
pub type WeightSet = model::WeightSet<f64>;
pub type ElasticityTensor = model::ElasticityTensor<f64>;
pub type PsiDerivatives = model::PsiDerivatives<f64>;

pub type Tensor2F32 = mechanics::Tensor2<f32>;
pub type DeformationGradientF32 = mechanics::DeformationGradient<f32>;
pub type ConstitutiveModelF32 = model::ConstitutiveModel<f32>;
