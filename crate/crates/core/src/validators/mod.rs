//! Sampling-based audit of nine physical admissibility constraints.
//!
//! Every check is a pure function of a model and a [`ToleranceConfig`]. A
//! check passes only when no violation is found on its sample set; failing
//! checks carry a witness that reproduces the violation. Model evaluation
//! errors fail the affected constraint instead of aborting the report.

mod ellipticity;
mod thermo;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::mechanics::{base_sample_set, rotation_sets, Tensor2};
use crate::model::ConstitutiveModel;
use crate::DeformationGradient;

pub use ellipticity::{check_ellipticity, ELLIPTICITY_CHUNK};
pub use thermo::{
    check_thermodynamic_consistency, loop_one, loop_two, path_a, path_b, path_work,
    DeformationPath, PathWork,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceConfig {
    pub tau_rel: f64,
    pub tau_abs: f64,
    pub tau_loop: f64,
    pub tau_pointwise: f64,
    pub tau_norm: f64,
    pub n_seg: usize,
    /// Half-width `L` of the log-stretch window of the ellipticity grid.
    pub half_width: f64,
    pub grid_n: usize,
    pub n_dirs: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            tau_rel: 1e-3,
            tau_abs: 1e-4,
            tau_loop: 1e-2,
            tau_pointwise: 1e-2,
            tau_norm: 1e-3,
            n_seg: 200,
            half_width: 2.0,
            grid_n: 50,
            n_dirs: 200,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<(), String> {
        let reals = [
            ("tau_rel", self.tau_rel),
            ("tau_abs", self.tau_abs),
            ("tau_loop", self.tau_loop),
            ("tau_pointwise", self.tau_pointwise),
            ("tau_norm", self.tau_norm),
            ("half_width", self.half_width),
        ];
        for (name, v) in reals {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        let counts = [("n_seg", self.n_seg), ("n_dirs", self.n_dirs)];
        for (name, v) in counts {
            if v == 0 {
                return Err(format!("{name} must be positive"));
            }
        }
        if self.grid_n < 2 {
            return Err("grid_n must be at least 2".into());
        }
        Ok(())
    }
}

/// `|x − y| ≤ max(τ_rel·max(|x|, |y|), τ_abs)`.
pub fn approx_eq(x: f64, y: f64, tol: &ToleranceConfig) -> bool {
    (x - y).abs() <= (tol.tau_rel * x.abs().max(y.abs())).max(tol.tau_abs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintId {
    ThermodynamicConsistency,
    StressSymmetry,
    Objectivity,
    MaterialSymmetry,
    Ellipticity,
    Growth,
    EnergyNormalization,
    StressNormalization,
    NonNegativity,
}

impl ConstraintId {
    pub const ALL: [ConstraintId; 9] = [
        ConstraintId::ThermodynamicConsistency,
        ConstraintId::StressSymmetry,
        ConstraintId::Objectivity,
        ConstraintId::MaterialSymmetry,
        ConstraintId::Ellipticity,
        ConstraintId::Growth,
        ConstraintId::EnergyNormalization,
        ConstraintId::StressNormalization,
        ConstraintId::NonNegativity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConstraintId::ThermodynamicConsistency => "thermodynamic_consistency",
            ConstraintId::StressSymmetry => "stress_symmetry",
            ConstraintId::Objectivity => "objectivity",
            ConstraintId::MaterialSymmetry => "material_symmetry",
            ConstraintId::Ellipticity => "ellipticity",
            ConstraintId::Growth => "growth",
            ConstraintId::EnergyNormalization => "energy_normalization",
            ConstraintId::StressNormalization => "stress_normalization",
            ConstraintId::NonNegativity => "non_negativity",
        }
    }

    /// One-line statement of the constraint, used in prompts and reports.
    pub fn description(self) -> &'static str {
        match self {
            ConstraintId::ThermodynamicConsistency => {
                "stress derives from a strain-energy potential, so work is path independent"
            }
            ConstraintId::StressSymmetry => "the Cauchy stress P F^T is symmetric",
            ConstraintId::Objectivity => "energy is invariant under rotations of the current configuration",
            ConstraintId::MaterialSymmetry => {
                "energy is invariant under rotations and reflections of the reference configuration"
            }
            ConstraintId::Ellipticity => "the energy is rank-one convex (Legendre-Hadamard condition)",
            ConstraintId::Growth => "energy grows without bound as J tends to 0 or infinity",
            ConstraintId::EnergyNormalization => "energy vanishes in the undeformed state",
            ConstraintId::StressNormalization => "stress vanishes in the undeformed state",
            ConstraintId::NonNegativity => "energy is non-negative for every deformation",
        }
    }
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstraintId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConstraintId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown constraint `{s}`"))
    }
}

/// Reproducible evidence of a violation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    State {
        f: Tensor2<f64>,
    },
    Transform {
        f: Tensor2<f64>,
        q: Tensor2<f64>,
    },
    RankOne {
        f: Tensor2<f64>,
        a: [f64; 3],
        b: [f64; 3],
        value: f64,
    },
    Path {
        path: String,
        metric: u8,
        step: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintVerdict {
    pub id: ConstraintId,
    pub passed: bool,
    /// Largest violation measure seen (constraint specific); non-finite
    /// values are stored as `f64::MAX`.
    pub worst: f64,
    pub witness: Option<Witness>,
    pub samples_checked: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn finite_or_max(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::MAX
    }
}

impl ConstraintVerdict {
    pub fn pass(id: ConstraintId, worst: f64, samples_checked: usize) -> Self {
        Self {
            id,
            passed: true,
            worst: finite_or_max(worst),
            witness: None,
            samples_checked,
            metrics: BTreeMap::new(),
            note: None,
        }
    }

    pub fn fail(id: ConstraintId, worst: f64, witness: Witness, samples_checked: usize) -> Self {
        Self {
            id,
            passed: false,
            worst: finite_or_max(worst),
            witness: Some(witness),
            samples_checked,
            metrics: BTreeMap::new(),
            note: None,
        }
    }

    /// Failure caused by a model evaluation error at `f`.
    pub fn errored(id: ConstraintId, f: &DeformationGradient, err: impl fmt::Display, samples: usize) -> Self {
        let mut v = Self::fail(id, f64::MAX, Witness::State { f: *f.tensor() }, samples);
        v.note = Some(format!("model evaluation failed: {err}"));
        v
    }

    pub fn with_metric(mut self, name: &str, value: f64) -> Self {
        self.metrics.insert(name.to_string(), finite_or_max(value));
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub verdicts: Vec<ConstraintVerdict>,
    pub overall: bool,
    /// Wall-clock time per check; not serialized so reports stay
    /// deterministic.
    #[serde(skip)]
    pub timings: Vec<(ConstraintId, Duration)>,
}

impl ValidationReport {
    pub fn verdict(&self, id: ConstraintId) -> &ConstraintVerdict {
        self.verdicts
            .iter()
            .find(|v| v.id == id)
            .expect("report holds every constraint")
    }

    pub fn failed(&self) -> Vec<ConstraintId> {
        self.verdicts.iter().filter(|v| !v.passed).map(|v| v.id).collect()
    }

    pub fn passed_count(&self) -> usize {
        self.verdicts.iter().filter(|v| v.passed).count()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn check_stress_symmetry(model: &ConstitutiveModel<f64>, tol: &ToleranceConfig) -> ConstraintVerdict {
    let id = ConstraintId::StressSymmetry;
    let mut worst = 0.0f64;
    let states = base_sample_set::<f64>();
    for (n, f) in states.iter().enumerate() {
        let sigma = match model.cauchy_stress(f) {
            Ok(s) => s,
            Err(e) => return ConstraintVerdict::errored(id, f, e, n + 1),
        };
        for i in 0..3 {
            for j in i + 1..3 {
                let (a, b) = (sigma[(i, j)], sigma[(j, i)]);
                worst = worst.max((a - b).abs());
                if !approx_eq(a, b, tol) {
                    return ConstraintVerdict::fail(id, (a - b).abs(), Witness::State { f: *f.tensor() }, n + 1);
                }
            }
        }
    }
    ConstraintVerdict::pass(id, worst, states.len())
}

fn energy_invariance(
    model: &ConstitutiveModel<f64>,
    tol: &ToleranceConfig,
    id: ConstraintId,
    transforms: &[Tensor2<f64>],
    apply: impl Fn(&DeformationGradient, &Tensor2<f64>) -> DeformationGradient,
) -> ConstraintVerdict {
    let mut worst = 0.0f64;
    let mut samples = 0;
    for f in base_sample_set::<f64>() {
        let psi = model.psi(&f);
        for q in transforms {
            samples += 1;
            let psi_q = model.psi(&apply(&f, q));
            let dev = (psi_q - psi).abs();
            if !approx_eq(psi_q, psi, tol) {
                return ConstraintVerdict::fail(
                    id,
                    dev,
                    Witness::Transform {
                        f: *f.tensor(),
                        q: *q,
                    },
                    samples,
                );
            }
            worst = worst.max(dev);
        }
    }
    ConstraintVerdict::pass(id, worst, samples)
}

/// `ψ(QF) ≈ ψ(F)` over the sample set and the proper rotations.
pub fn check_objectivity(model: &ConstitutiveModel<f64>, tol: &ToleranceConfig) -> ConstraintVerdict {
    let rs = rotation_sets::<f64>();
    energy_invariance(model, tol, ConstraintId::Objectivity, &rs.proper, |f, q| f.rotated(q))
}

/// `ψ(FQᵀ) ≈ ψ(F)` over the sample set, rotations and reflections.
pub fn check_material_symmetry(model: &ConstitutiveModel<f64>, tol: &ToleranceConfig) -> ConstraintVerdict {
    let rs = rotation_sets::<f64>();
    let all: Vec<_> = rs.all().copied().collect();
    energy_invariance(model, tol, ConstraintId::MaterialSymmetry, &all, |f, q| {
        f.reference_transformed(q)
    })
}

/// Holds on the incompressible admissible set (`J = 1`), so nothing is
/// evaluated.
pub fn check_growth(_model: &ConstitutiveModel<f64>, _tol: &ToleranceConfig) -> ConstraintVerdict {
    ConstraintVerdict::pass(ConstraintId::Growth, 0.0, 0)
        .with_note("J = 1 on every admissible state; the growth limits J → 0 and J → ∞ are unreachable")
}

pub fn check_energy_normalization(model: &ConstitutiveModel<f64>, tol: &ToleranceConfig) -> ConstraintVerdict {
    let id = ConstraintId::EnergyNormalization;
    let f = DeformationGradient::identity();
    let v = model.psi(&f).abs();
    if v <= tol.tau_norm {
        ConstraintVerdict::pass(id, v, 1)
    } else {
        ConstraintVerdict::fail(id, v, Witness::State { f: *f.tensor() }, 1)
    }
}

pub fn check_stress_normalization(model: &ConstitutiveModel<f64>, tol: &ToleranceConfig) -> ConstraintVerdict {
    let id = ConstraintId::StressNormalization;
    let f = DeformationGradient::identity();
    let v = match model.piola_stress(&f) {
        Ok(p) => p.max_abs(),
        Err(e) => return ConstraintVerdict::errored(id, &f, e, 1),
    };
    if v <= tol.tau_norm {
        ConstraintVerdict::pass(id, v, 1)
    } else {
        ConstraintVerdict::fail(id, v, Witness::State { f: *f.tensor() }, 1)
    }
}

/// `ψ ≥ −τ_norm` on the sample set; `worst` is the most negative energy
/// magnitude (0 when none is negative).
pub fn check_non_negativity(model: &ConstitutiveModel<f64>, tol: &ToleranceConfig) -> ConstraintVerdict {
    let id = ConstraintId::NonNegativity;
    let mut worst = 0.0f64;
    let states = base_sample_set::<f64>();
    for (n, f) in states.iter().enumerate() {
        let psi = model.psi(f);
        if !(psi >= -tol.tau_norm) {
            return ConstraintVerdict::fail(id, -psi, Witness::State { f: *f.tensor() }, n + 1);
        }
        worst = worst.max(-psi);
    }
    ConstraintVerdict::pass(id, worst, states.len())
}

/// Runs a single check by id.
pub fn check(id: ConstraintId, model: &ConstitutiveModel<f64>, tol: &ToleranceConfig) -> ConstraintVerdict {
    match id {
        ConstraintId::ThermodynamicConsistency => check_thermodynamic_consistency(model, tol),
        ConstraintId::StressSymmetry => check_stress_symmetry(model, tol),
        ConstraintId::Objectivity => check_objectivity(model, tol),
        ConstraintId::MaterialSymmetry => check_material_symmetry(model, tol),
        ConstraintId::Ellipticity => check_ellipticity(model, tol),
        ConstraintId::Growth => check_growth(model, tol),
        ConstraintId::EnergyNormalization => check_energy_normalization(model, tol),
        ConstraintId::StressNormalization => check_stress_normalization(model, tol),
        ConstraintId::NonNegativity => check_non_negativity(model, tol),
    }
}

/// All nine checks; `overall` is their conjunction.
pub fn validate_all(model: &ConstitutiveModel<f64>, tol: &ToleranceConfig) -> ValidationReport {
    let mut verdicts = Vec::with_capacity(9);
    let mut timings = Vec::with_capacity(9);
    for id in ConstraintId::ALL {
        let start = Instant::now();
        verdicts.push(check(id, model, tol));
        timings.push((id, start.elapsed()));
    }
    ValidationReport {
        overall: verdicts.iter().all(|v| v.passed),
        verdicts,
        timings,
    }
}
