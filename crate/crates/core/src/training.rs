//! Fitting constitutive networks to loading-mode stress data.
//!
//! The loss is the mean over loading modes of the per-mode mean squared
//! stress error. Its gradient is exact: for a fixed state the measured stress
//! component is linear in each block's feature derivative `ψ_t'(x_t)`, so
//! the pressure-eliminated stress basis of every block is precomputed once
//! and only the block derivatives change with the weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datasets::StressStrainDataset;
use crate::mechanics::{DeformationGradient, LoadingMode, MechanicsError};
use crate::model::{
    ActivationKind, ConstitutiveModel, Kinematics, ModelDescriptor, ModelError, WeightSet,
};

pub const DEFAULT_EPOCHS: usize = 5000;
pub const DEFAULT_LEARNING_RATE: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("target has zero variance")]
    DegenerateTarget,
    #[error("prediction and target lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Mechanics(#[from] MechanicsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Optimizer {
    Adam { beta1: f64, beta2: f64, eps: f64 },
    Sgd,
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Uniform initialization interval for inner and outer weights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitRange {
    pub inner: [f64; 2],
    pub outer: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitRanges {
    pub linear: InitRange,
    pub square: InitRange,
    pub softplus: InitRange,
    pub softplus_sq: InitRange,
    pub exp: InitRange,
}

impl Default for InitRanges {
    fn default() -> Self {
        Self {
            linear: InitRange {
                inner: [0.05, 0.3],
                outer: [0.02, 0.15],
            },
            square: InitRange {
                inner: [0.05, 0.3],
                outer: [1e-3, 2e-2],
            },
            softplus: InitRange {
                inner: [0.1, 0.5],
                outer: [0.02, 0.15],
            },
            softplus_sq: InitRange {
                inner: [0.1, 0.5],
                outer: [1e-3, 2e-2],
            },
            exp: InitRange {
                inner: [0.05, 0.25],
                outer: [1e-4, 5e-3],
            },
        }
    }
}

impl InitRanges {
    pub fn for_activation(&self, kind: ActivationKind) -> InitRange {
        match kind {
            ActivationKind::Linear | ActivationKind::Sine => self.linear,
            ActivationKind::Square => self.square,
            ActivationKind::SoftplusShifted | ActivationKind::SoftplusRaw => self.softplus,
            ActivationKind::SoftplusSq => self.softplus_sq,
            ActivationKind::ExpM1my => self.exp,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
    pub init: InitRanges,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: DEFAULT_EPOCHS,
            learning_rate: DEFAULT_LEARNING_RATE,
            optimizer: Optimizer::default(),
            seed: 0,
            init: InitRanges::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.epochs == 0 {
            return Err(TrainError::InvalidConfig("epochs must be ≥ 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if let Optimizer::Adam { beta1, beta2, eps } = self.optimizer {
            let unit = |b: f64| (0.0..1.0).contains(&b);
            if !(unit(beta1) && unit(beta2) && eps > 0.0) {
                return Err(TrainError::InvalidConfig("adam needs β ∈ [0, 1) and ε > 0".into()));
            }
        }
        Ok(())
    }
}

/// Accuracy on one loading mode. `r2` is absent when it is undefined
/// (fewer than two points or constant target).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeFit {
    pub mode: LoadingMode,
    pub points: usize,
    pub r2: Option<f64>,
    pub mse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub modes: Vec<ModeFit>,
    pub loss_history: Vec<f64>,
    pub best_loss: f64,
    pub best_epoch: usize,
}

impl FitReport {
    /// Mean of the defined per-mode R² values.
    pub fn mean_r2(&self) -> Option<f64> {
        let v: Vec<f64> = self.modes.iter().filter_map(|m| m.r2).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn mode(&self, mode: LoadingMode) -> Option<&ModeFit> {
        self.modes.iter().find(|m| m.mode == mode)
    }

    /// Running minimum of the loss history.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.loss_history
            .iter()
            .scan(f64::INFINITY, |b, &l| {
                *b = b.min(l);
                Some(*b)
            })
            .collect()
    }
}

/// Measured stress component along a loading curve.
pub fn predict_curve(
    model: &ConstitutiveModel<f64>,
    mode: LoadingMode,
    params: &[f64],
) -> Result<Vec<f64>, TrainError> {
    let (i, j) = mode.measured_component();
    params
        .iter()
        .map(|&p| {
            let f = DeformationGradient::from_mode(mode, p)?;
            Ok(model.piola_stress(&f)?[(i, j)])
        })
        .collect()
}

/// `(R², MSE)` of a prediction.
pub fn fit_metrics(pred: &[f64], target: &[f64]) -> Result<(f64, f64), TrainError> {
    if pred.len() != target.len() {
        return Err(TrainError::LengthMismatch(pred.len(), target.len()));
    }
    if target.len() < 2 {
        return Err(TrainError::DegenerateTarget);
    }
    let n = target.len() as f64;
    let mean = target.iter().sum::<f64>() / n;
    let ss_res: f64 = pred.iter().zip(target).map(|(p, t)| (t - p).powi(2)).sum();
    let ss_tot: f64 = target.iter().map(|t| (t - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(TrainError::DegenerateTarget);
    }
    Ok((1.0 - ss_res / ss_tot, ss_res / n))
}

fn mse(pred: &[f64], target: &[f64]) -> f64 {
    pred.iter().zip(target).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / target.len() as f64
}

/// Mean over modes of the per-mode mean squared stress error.
pub fn loss(model: &ConstitutiveModel<f64>, dataset: &StressStrainDataset) -> Result<f64, TrainError> {
    let modes: Vec<_> = dataset.modes.iter().filter(|m| !m.samples.is_empty()).collect();
    if modes.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let mut total = 0.0;
    for m in &modes {
        let pred = predict_curve(model, m.mode, &m.params())?;
        total += mse(&pred, &m.stresses());
    }
    Ok(total / modes.len() as f64)
}

/// Per-mode R² and MSE of a model on a dataset.
pub fn evaluate_fit(
    model: &ConstitutiveModel<f64>,
    dataset: &StressStrainDataset,
) -> Result<Vec<ModeFit>, TrainError> {
    dataset
        .modes
        .iter()
        .filter(|m| !m.samples.is_empty())
        .map(|m| {
            let pred = predict_curve(model, m.mode, &m.params())?;
            let target = m.stresses();
            let r2 = fit_metrics(&pred, &target).ok().map(|(r2, _)| r2);
            Ok(ModeFit {
                mode: m.mode,
                points: target.len(),
                r2,
                mse: mse(&pred, &target),
            })
        })
        .collect()
}

/// One data point with the weight-independent part of its stress.
struct Point {
    target: f64,
    /// Block feature values.
    x: Vec<f64>,
    /// Pressure-eliminated stress basis of each block; zero when the
    /// feature sits below its kink.
    basis: Vec<f64>,
    offset: f64,
}

struct Problem {
    modes: Vec<Vec<Point>>,
}

impl Problem {
    fn new(model: &ConstitutiveModel<f64>, dataset: &StressStrainDataset) -> Result<Self, TrainError> {
        let descriptor = model.descriptor();
        // Weight-independent stress (augmentations) of a zero-weight copy.
        let zero_model = ConstitutiveModel::new(descriptor.clone(), WeightSet::zeros(descriptor))?;
        let mut modes = Vec::new();
        for m in dataset.modes.iter().filter(|m| !m.samples.is_empty()) {
            let (ci, cj) = m.mode.measured_component();
            let mut points = Vec::with_capacity(m.samples.len());
            for s in &m.samples {
                let f = DeformationGradient::from_mode(m.mode, s.param)?;
                let (finv_t, den) = ConstitutiveModel::pressure_basis(&f)?;
                let k = Kinematics::new(&f);
                let mut x = Vec::with_capacity(descriptor.terms.len());
                let mut basis = Vec::with_capacity(descriptor.terms.len());
                for spec in &descriptor.terms {
                    let feat = k.feature(spec.feature);
                    let g = k.feature_gradient(spec.feature);
                    x.push(feat.x);
                    basis.push(if feat.active {
                        g[(ci, cj)] - g[(2, 2)] / den * finv_t[(ci, cj)]
                    } else {
                        0.0
                    });
                }
                let offset = zero_model.piola_stress(&f)?[(ci, cj)];
                points.push(Point {
                    target: s.stress,
                    x,
                    basis,
                    offset,
                });
            }
            modes.push(points);
        }
        if modes.is_empty() {
            return Err(TrainError::EmptyDataset);
        }
        Ok(Self { modes })
    }

    /// Loss and, when `grad` is given, its gradient in flat weight order.
    fn eval(&self, descriptor: &ModelDescriptor, w: &WeightSet<f64>, mut grad: Option<&mut [f64]>) -> f64 {
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        let n_modes = self.modes.len() as f64;
        let mut total = 0.0;
        for points in &self.modes {
            let scale = 1.0 / (n_modes * points.len() as f64);
            for p in points {
                let mut pred = p.offset;
                for (t, spec) in descriptor.terms.iter().enumerate() {
                    if p.basis[t] == 0.0 {
                        continue;
                    }
                    let tw = &w.terms[t];
                    let mut de = 0.0;
                    for (&wi, &wo) in tw.inner.iter().zip(&tw.outer) {
                        de += wo * spec.activation.eval(wi * p.x[t]).df * wi;
                    }
                    pred += de * p.basis[t];
                }
                let r = pred - p.target;
                total += scale * r * r;
                let Some(g) = grad.as_deref_mut() else { continue };
                let coef = 2.0 * scale * r;
                let mut at = 0;
                for (t, spec) in descriptor.terms.iter().enumerate() {
                    let tw = &w.terms[t];
                    let n = tw.inner.len();
                    if p.basis[t] != 0.0 {
                        let c = coef * p.basis[t];
                        for (k, (&wi, &wo)) in tw.inner.iter().zip(&tw.outer).enumerate() {
                            let a = spec.activation.eval(wi * p.x[t]);
                            g[at + k] += c * wo * (a.d2f * p.x[t] * wi + a.df);
                            g[at + n + k] += c * a.df * wi;
                        }
                    }
                    at += 2 * n;
                }
            }
        }
        total
    }
}

/// Exact gradient of [`loss`] in the shape of the model's weights.
pub fn loss_gradient(
    model: &ConstitutiveModel<f64>,
    dataset: &StressStrainDataset,
) -> Result<WeightSet<f64>, TrainError> {
    let problem = Problem::new(model, dataset)?;
    let mut g = vec![0.0; model.descriptor().parameter_count()];
    problem.eval(model.descriptor(), model.weights(), Some(&mut g));
    Ok(WeightSet::from_flat(model.descriptor(), &g)?)
}

/// Seeded uniform draw from the per-family ranges.
pub fn initialize_weights(descriptor: &ModelDescriptor, init: &InitRanges, seed: u64) -> WeightSet<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = WeightSet::zeros(descriptor);
    for (tw, spec) in w.terms.iter_mut().zip(&descriptor.terms) {
        let r = init.for_activation(spec.activation);
        for v in tw.inner.iter_mut() {
            *v = rng.random_range(r.inner[0]..r.inner[1]);
        }
        for v in tw.outer.iter_mut() {
            *v = rng.random_range(r.outer[0]..r.outer[1]);
        }
    }
    w
}

/// Mask of flat weights the optimizer may update.
fn trainable_mask(descriptor: &ModelDescriptor) -> Vec<bool> {
    descriptor
        .terms
        .iter()
        .flat_map(|t| std::iter::repeat_n(t.trainable, 2 * t.neurons))
        .collect()
}

/// Optimizes the model's current weights. Sign constraints are re-applied
/// after every step and the best-loss weights seen are returned.
pub fn train(
    model: &ConstitutiveModel<f64>,
    dataset: &StressStrainDataset,
    config: &TrainConfig,
) -> Result<(ConstitutiveModel<f64>, FitReport), TrainError> {
    config.validate()?;
    let descriptor = model.descriptor();
    let problem = Problem::new(model, dataset)?;
    let mask = trainable_mask(descriptor);
    let n = mask.len();

    let mut w = model.weights().clone();
    w.project(descriptor);
    let mut flat = w.to_flat();
    let mut grad = vec![0.0; n];
    let (mut m1, mut m2) = (vec![0.0; n], vec![0.0; n]);
    let mut history = Vec::with_capacity(config.epochs + 1);
    let mut best = (f64::INFINITY, 0, flat.clone());

    for epoch in 0..=config.epochs {
        let last = epoch == config.epochs;
        let l = problem.eval(descriptor, &w, (!last).then_some(grad.as_mut_slice()));
        if !l.is_finite() {
            return Err(TrainError::NonFiniteLoss { epoch });
        }
        history.push(l);
        if l < best.0 {
            best = (l, epoch, flat.clone());
        }
        if last {
            break;
        }
        let t = (epoch + 1) as i32;
        for k in 0..n {
            if !mask[k] {
                continue;
            }
            let step = match config.optimizer {
                Optimizer::Sgd => grad[k],
                Optimizer::Adam { beta1, beta2, eps } => {
                    m1[k] = beta1 * m1[k] + (1.0 - beta1) * grad[k];
                    m2[k] = beta2 * m2[k] + (1.0 - beta2) * grad[k] * grad[k];
                    let mh = m1[k] / (1.0 - beta1.powi(t));
                    let vh = m2[k] / (1.0 - beta2.powi(t));
                    mh / (vh.sqrt() + eps)
                }
            };
            flat[k] -= config.learning_rate * step;
        }
        w = WeightSet::from_flat(descriptor, &flat)?;
        w.project(descriptor);
        flat = w.to_flat();
    }

    let mut trained = model.clone();
    trained.set_weights(WeightSet::from_flat(descriptor, &best.2)?)?;
    let report = FitReport {
        modes: evaluate_fit(&trained, dataset)?,
        loss_history: history,
        best_loss: best.0,
        best_epoch: best.1,
    };
    Ok((trained, report))
}

/// Seeded initialization of `descriptor` followed by [`train`].
pub fn fit(
    descriptor: &ModelDescriptor,
    dataset: &StressStrainDataset,
    config: &TrainConfig,
) -> Result<(ConstitutiveModel<f64>, FitReport), TrainError> {
    config.validate()?;
    let w = initialize_weights(descriptor, &config.init, config.seed);
    train(&ConstitutiveModel::new(descriptor.clone(), w)?, dataset, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{generate_synthetic, ModeSamples, Sample, Split, StressUnit};
    use crate::model::fixtures::{
        four_term_descriptor, full_block_descriptor, mooney_rivlin, neo_hookean, raw_f_fixture,
        two_term_descriptor,
    };
    use crate::model::{FeatureKind, TermSpec};
    use proptest::prelude::*;

    fn dataset_of(modes: Vec<(LoadingMode, Vec<(f64, f64)>)>) -> StressStrainDataset {
        StressStrainDataset::new(
            "t",
            StressUnit::MPa,
            modes
                .into_iter()
                .map(|(mode, pts)| ModeSamples {
                    mode,
                    samples: pts
                        .into_iter()
                        .map(|(param, stress)| Sample {
                            param,
                            stress,
                            split: Split::Train,
                        })
                        .collect(),
                })
                .collect(),
        )
        .unwrap()
    }

    fn nh_dataset() -> StressStrainDataset {
        let params: Vec<f64> = (0..15).map(|i| 1.0 + 0.1 * i as f64).collect();
        generate_synthetic(
            &neo_hookean(0.5),
            "nh",
            StressUnit::MPa,
            &[
                (LoadingMode::UniaxialTension, params.clone()),
                (LoadingMode::Equibiaxial, params.clone()),
                (LoadingMode::PureShear, params),
            ],
        )
        .unwrap()
    }

    fn fd_gradient(model: &ConstitutiveModel<f64>, ds: &StressStrainDataset, h: f64) -> Vec<f64> {
        let base = model.weights().to_flat();
        (0..base.len())
            .map(|k| {
                let at = |s: f64| {
                    let mut w = base.clone();
                    w[k] += s * h;
                    let m = ConstitutiveModel::new(
                        model.descriptor().clone(),
                        WeightSet::from_flat(model.descriptor(), &w).unwrap(),
                    )
                    .unwrap();
                    loss(&m, ds).unwrap()
                };
                (at(1.0) - at(-1.0)) / (2.0 * h)
            })
            .collect()
    }

    fn five_point_dataset() -> StressStrainDataset {
        dataset_of(vec![
            (LoadingMode::UniaxialTension, vec![(1.2, 0.3), (1.6, 0.9), (2.2, 1.4)]),
            (LoadingMode::SimpleShear, vec![(0.3, 0.2), (0.8, 0.7)]),
        ])
    }

    #[test]
    fn predict_curve_examples() {
        let nh = neo_hookean(0.5);
        assert_eq!(predict_curve(&nh, LoadingMode::UniaxialTension, &[1.0]).unwrap(), vec![0.0]);
        let p = predict_curve(&nh, LoadingMode::UniaxialTension, &[2.0]).unwrap();
        assert!((p[0] - 1.75).abs() < 1e-12);
        let p = predict_curve(&nh, LoadingMode::SimpleShear, &[0.5]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn predict_curve_is_zero_at_reference() {
        for m in [neo_hookean(0.5), mooney_rivlin(0.5, 0.1)] {
            for mode in LoadingMode::ALL {
                let p = predict_curve(&m, mode, &[mode.reference_param()]).unwrap();
                assert!(p[0].abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn loss_examples() {
        let ds = nh_dataset();
        assert!(loss(&neo_hookean(0.5), &ds).unwrap() <= 1e-20);

        let zero = neo_hookean(0.0);
        let expected: f64 = ds
            .modes
            .iter()
            .map(|m| m.stresses().iter().map(|s| s * s).sum::<f64>() / m.samples.len() as f64)
            .sum::<f64>()
            / 3.0;
        assert!((loss(&zero, &ds).unwrap() - expected).abs() <= 1e-12 * expected);

        // P12 = 2 C1 γ = 1.0 at γ = 1.
        let single = dataset_of(vec![(LoadingMode::SimpleShear, vec![(1.0, 2.0)])]);
        assert!((loss(&neo_hookean(0.5), &single).unwrap() - 1.0).abs() < 1e-12);

        let empty = dataset_of(vec![]);
        assert!(matches!(loss(&zero, &empty), Err(TrainError::EmptyDataset)));
    }

    #[test]
    fn fit_metrics_examples() {
        let t = [1.0, 2.0, 3.0];
        assert_eq!(fit_metrics(&t, &t).unwrap(), (1.0, 0.0));
        let (r2, _) = fit_metrics(&[2.0; 3], &t).unwrap();
        assert_eq!(r2, 0.0);
        let (r2, mse) = fit_metrics(&[1.0, 2.0, 4.0], &t).unwrap();
        assert!((mse - 1.0 / 3.0).abs() < 1e-15 && (r2 - 0.5).abs() < 1e-15);
        assert!(matches!(fit_metrics(&[1.0, 1.0], &[2.0, 2.0]), Err(TrainError::DegenerateTarget)));
        assert!(matches!(fit_metrics(&[1.0], &[2.0, 2.0]), Err(TrainError::LengthMismatch(1, 2))));
    }

    #[test]
    fn gradient_matches_fd_on_two_term_model() {
        let m = ConstitutiveModel::new(
            two_term_descriptor(),
            initialize_weights(&two_term_descriptor(), &InitRanges::default(), 7),
        )
        .unwrap();
        let ds = five_point_dataset();
        let g = loss_gradient(&m, &ds).unwrap().to_flat();
        let fd = fd_gradient(&m, &ds, 1e-6);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-4 * a.abs().max(b.abs()).max(1e-8), "{a} vs {b}");
        }
    }

    #[test]
    fn gradient_vanishes_at_perfect_fit() {
        let ds = nh_dataset();
        let g = loss_gradient(&neo_hookean(0.5), &ds).unwrap().to_flat();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm <= 1e-10, "{norm}");
    }

    #[test]
    fn gradient_scales_with_targets_for_linear_model() {
        let m = neo_hookean(0.0);
        let ds = five_point_dataset();
        let mut doubled = ds.clone();
        for mode in doubled.modes.iter_mut() {
            for s in mode.samples.iter_mut() {
                s.stress *= 2.0;
            }
        }
        let g1 = loss_gradient(&m, &ds).unwrap().to_flat();
        let g2 = loss_gradient(&m, &doubled).unwrap().to_flat();
        for (a, b) in g1.iter().zip(&g2) {
            assert!((2.0 * a - b).abs() <= 1e-12 * b.abs().max(1e-12));
        }
    }

    #[test]
    fn gradient_covers_raw_feature_blocks() {
        let m = raw_f_fixture();
        let ds = five_point_dataset();
        let g = loss_gradient(&m, &ds).unwrap().to_flat();
        let fd = fd_gradient(&m, &ds, 1e-6);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-4 * a.abs().max(b.abs()).max(1e-8), "{a} vs {b}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn gradient_matches_fd_on_random_models(seed in 0u64..10_000) {
            let d = full_block_descriptor(1);
            let m = ConstitutiveModel::new(d.clone(), initialize_weights(&d, &InitRanges::default(), seed)).unwrap();
            let ds = five_point_dataset();
            let g = loss_gradient(&m, &ds).unwrap().to_flat();
            let fd = fd_gradient(&m, &ds, 1e-6);
            let scale = g.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-8);
            for (a, b) in g.iter().zip(&fd) {
                prop_assert!((a - b).abs() <= 1e-4 * scale, "{} vs {}", a, b);
            }
        }
    }

    #[test]
    fn training_recovers_neo_hookean() {
        let ds = nh_dataset();
        let (m, report) = fit(&two_term_descriptor(), &ds, &TrainConfig::default()).unwrap();
        for mf in &report.modes {
            assert!(mf.r2.unwrap() >= 0.999, "{:?}", mf);
        }
        assert!(m.weights().satisfies_constraints(m.descriptor()));
        assert_eq!(report.loss_history.len(), DEFAULT_EPOCHS + 1);
        let bsf = report.best_so_far();
        assert!(bsf.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*bsf.last().unwrap(), report.best_loss);
    }

    #[test]
    fn training_is_deterministic() {
        let ds = nh_dataset();
        let cfg = TrainConfig {
            epochs: 300,
            seed: 11,
            ..TrainConfig::default()
        };
        let (a, ra) = fit(&four_term_descriptor(), &ds, &cfg).unwrap();
        let (b, rb) = fit(&four_term_descriptor(), &ds, &cfg).unwrap();
        let bits = |m: &ConstitutiveModel<f64>| m.weights().to_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(ra, rb);
    }

    #[test]
    fn config_preconditions() {
        let ds = nh_dataset();
        let bad = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        assert!(matches!(fit(&two_term_descriptor(), &ds, &bad), Err(TrainError::InvalidConfig(_))));
        let bad = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        assert!(matches!(fit(&two_term_descriptor(), &ds, &bad), Err(TrainError::InvalidConfig(_))));
    }

    #[test]
    fn projection_holds_after_every_step() {
        // A huge SGD step drives weights negative before projection.
        let ds = nh_dataset();
        for epochs in [1, 2, 5] {
            let cfg = TrainConfig {
                epochs,
                learning_rate: 10.0,
                optimizer: Optimizer::Sgd,
                ..TrainConfig::default()
            };
            if let Ok((m, _)) = fit(&four_term_descriptor(), &ds, &cfg) {
                assert!(m.weights().satisfies_constraints(m.descriptor()));
            }
        }
    }

    #[test]
    fn frozen_terms_keep_their_weights() {
        let m = raw_f_fixture();
        let ds = nh_dataset();
        let cfg = TrainConfig {
            epochs: 50,
            ..TrainConfig::default()
        };
        let (t, _) = train(&m, &ds, &cfg).unwrap();
        assert_eq!(t.weights().terms[1], m.weights().terms[1]);
    }

    #[test]
    fn divergence_is_reported() {
        let d = ModelDescriptor::new(
            "free",
            vec![TermSpec::new(FeatureKind::I1m3, ActivationKind::Square, 1).free()],
        );
        let cfg = TrainConfig {
            epochs: 200,
            learning_rate: 1e3,
            optimizer: Optimizer::Sgd,
            ..TrainConfig::default()
        };
        assert!(matches!(fit(&d, &nh_dataset(), &cfg), Err(TrainError::NonFiniteLoss { .. })));
    }
}
