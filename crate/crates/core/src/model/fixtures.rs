//! Analytic reference materials and deliberately non-compliant models.
//!
//! The surrogates are canonical networks whose weights reproduce classic
//! closed-form laws. The violation fixtures each break a known subset of the
//! physical constraints, so that every validator can be shown to fail.

use super::{
    ActivationKind, ConstitutiveModel, FeatureKind, ModelDescriptor, StressAugmentation,
    TermSpec, TermWeights, WeightSet,
};

fn single(inner: f64, outer: f64) -> TermWeights<f64> {
    TermWeights {
        inner: vec![inner],
        outer: vec![outer],
    }
}

fn build(descriptor: ModelDescriptor, terms: Vec<TermWeights<f64>>) -> ConstitutiveModel<f64> {
    ConstitutiveModel::new(descriptor, WeightSet { terms }).expect("fixture is well formed")
}

/// `Ψ = C1 (I1 − 3)`.
pub fn neo_hookean(c1: f64) -> ConstitutiveModel<f64> {
    build(
        ModelDescriptor::new(
            "neo_hookean",
            vec![TermSpec::new(FeatureKind::I1m3, ActivationKind::Linear, 1)],
        ),
        vec![single(1.0, c1)],
    )
}

/// `Ψ = C1 (I1 − 3) + C2 (I2 − 3)`.
pub fn mooney_rivlin(c1: f64, c2: f64) -> ConstitutiveModel<f64> {
    build(
        ModelDescriptor::new("mooney_rivlin", two_term_descriptor().terms),
        vec![single(1.0, c1), single(1.0, c2)],
    )
}

/// Fixture constants of the synthetic rubber reference material.
pub const REFERENCE_MR_C1: f64 = 0.5;
pub const REFERENCE_MR_C2: f64 = 0.1;

/// Built-in ground truth for synthetic datasets.
pub fn reference_material() -> ConstitutiveModel<f64> {
    let mut m = mooney_rivlin(REFERENCE_MR_C1, REFERENCE_MR_C2);
    m.descriptor.metadata.name = "reference_mooney_rivlin".into();
    m
}

/// One linear block per invariant.
pub fn two_term_descriptor() -> ModelDescriptor {
    ModelDescriptor::new(
        "two_term",
        vec![
            TermSpec::new(FeatureKind::I1m3, ActivationKind::Linear, 1),
            TermSpec::new(FeatureKind::I2m3, ActivationKind::Linear, 1),
        ],
    )
}

/// Linear plus shifted-softplus blocks on both invariants.
pub fn four_term_descriptor() -> ModelDescriptor {
    ModelDescriptor::new(
        "four_term",
        vec![
            TermSpec::new(FeatureKind::I1m3, ActivationKind::Linear, 1),
            TermSpec::new(FeatureKind::I1m3, ActivationKind::SoftplusShifted, 2),
            TermSpec::new(FeatureKind::I2m3, ActivationKind::Linear, 1),
            TermSpec::new(FeatureKind::I2m3, ActivationKind::SoftplusShifted, 2),
        ],
    )
}

/// Every convex normalizing activation on both invariants.
pub fn full_block_descriptor(neurons: usize) -> ModelDescriptor {
    let kinds = [
        ActivationKind::Linear,
        ActivationKind::Square,
        ActivationKind::SoftplusShifted,
        ActivationKind::SoftplusSq,
        ActivationKind::ExpM1my,
    ];
    let terms = [FeatureKind::I1m3, FeatureKind::I2m3]
        .into_iter()
        .flat_map(|f| kinds.into_iter().map(move |a| TermSpec::new(f, a, neurons)))
        .collect();
    ModelDescriptor::new("full_block", terms)
}

/// Neo-Hookean base plus a frozen `exp_m1my(F33 − 1)` block: breaks
/// objectivity and material symmetry only.
pub fn raw_f_fixture() -> ConstitutiveModel<f64> {
    build(
        ModelDescriptor::new(
            "fixture_raw_f",
            vec![
                TermSpec::new(FeatureKind::I1m3, ActivationKind::Linear, 1),
                TermSpec::new(FeatureKind::RawF { row: 2, col: 2 }, ActivationKind::ExpM1my, 1)
                    .frozen(),
            ],
        ),
        vec![single(1.0, 0.5), single(1.0, 1.0)],
    )
}

/// Inner weight of the oscillating block in [`sine_fixture`].
pub const SINE_FIXTURE_INNER: f64 = 5.0;
/// Outer weight of the oscillating block in [`sine_fixture`].
pub const SINE_FIXTURE_OUTER: f64 = 0.1;

/// `Ψ = 0.5 (I1 − 3) + 0.1 sin(5 (I1 − 3))`: non-negative (0.5 ≥ 0.1·5) but
/// not rank-one convex.
pub fn sine_fixture() -> ConstitutiveModel<f64> {
    build(
        ModelDescriptor::new(
            "fixture_sine",
            vec![
                TermSpec::new(FeatureKind::I1m3, ActivationKind::Linear, 1),
                TermSpec::new(FeatureKind::I1m3, ActivationKind::Sine, 1),
            ],
        ),
        vec![single(1.0, 0.5), single(SINE_FIXTURE_INNER, SINE_FIXTURE_OUTER)],
    )
}

/// `Ψ = softplus(I1 − 3)` without normalization: `Ψ(I) = log 2`.
pub fn softplus_raw_fixture() -> ConstitutiveModel<f64> {
    let mut d = ModelDescriptor::new(
        "fixture_softplus_raw",
        vec![TermSpec::new(FeatureKind::I1m3, ActivationKind::SoftplusRaw, 1)],
    );
    d.normalize_energy = false;
    build(d, vec![single(1.0, 1.0)])
}

/// `Ψ = −0.5 (I1 − 3)` with a sign-free weight.
pub fn free_negative_fixture() -> ConstitutiveModel<f64> {
    build(
        ModelDescriptor::new(
            "fixture_free_negative",
            vec![TermSpec::new(FeatureKind::I1m3, ActivationKind::Linear, 1).free()],
        ),
        vec![single(1.0, -0.5)],
    )
}

/// Neo-Hookean (`2C1 = 1`) with a non-potential skew stress term.
pub fn skew_fixture(alpha: f64) -> ConstitutiveModel<f64> {
    let mut m = neo_hookean(0.5);
    m.descriptor.metadata.name = "fixture_skew".into();
    m.descriptor.stress_augmentation = StressAugmentation::Skew { alpha };
    m
}

/// Neo-Hookean (`2C1 = 1`) with a constant `P11` offset.
pub fn offset_fixture(value: f64) -> ConstitutiveModel<f64> {
    let mut m = neo_hookean(0.5);
    m.descriptor.metadata.name = "fixture_offset".into();
    m.descriptor.stress_augmentation = StressAugmentation::Offset { value };
    m
}
