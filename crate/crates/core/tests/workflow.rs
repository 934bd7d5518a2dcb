//! Dataset, training, validation and evaluation used together.

use hyperaudit_core::datasets::{generate_synthetic, invariant_plane_eval, load_dataset, rubber_protocols, write_dataset, StressUnit};
use hyperaudit_core::model::fixtures::{four_term_descriptor, reference_material, two_term_descriptor};
use hyperaudit_core::model::{load_model, save_model};
use hyperaudit_core::training::{evaluate_fit, fit, TrainConfig};
use hyperaudit_core::validators::{validate_all, ToleranceConfig};

#[test]
fn written_dataset_trains_to_a_valid_model() {
    let dir = tempfile::tempdir().unwrap();
    let ds = generate_synthetic(&reference_material(), "mr", StressUnit::MPa, &rubber_protocols()).unwrap();
    let manifest = write_dataset(&ds, dir.path()).unwrap();
    let loaded = load_dataset(&manifest).unwrap();
    assert_eq!(loaded, ds);

    let (model, report) = fit(&four_term_descriptor(), &loaded, &TrainConfig::default()).unwrap();
    assert!(report.modes.iter().all(|m| m.r2.unwrap() >= 0.99));
    let tol = ToleranceConfig { grid_n: 12, n_dirs: 40, ..ToleranceConfig::default() };
    assert!(validate_all(&model, &tol).overall);

    let path = dir.path().join("model.json");
    save_model(&model, &path).unwrap();
    let back = load_model(&path).unwrap();
    assert_eq!(evaluate_fit(&back, &loaded).unwrap(), report.modes);

    let map = invariant_plane_eval(&back, &reference_material(), 3.0, 20).unwrap();
    assert_eq!(map.records.len(), 400);
    assert!(map.max_rel_err_off_paths() <= 0.05);
}

#[test]
fn training_is_reproducible() {
    let ds = generate_synthetic(&reference_material(), "mr", StressUnit::MPa, &rubber_protocols()).unwrap();
    let cfg = TrainConfig { seed: 9, epochs: 500, ..TrainConfig::default() };
    let (a, _) = fit(&two_term_descriptor(), &ds, &cfg).unwrap();
    let (b, _) = fit(&two_term_descriptor(), &ds, &cfg).unwrap();
    assert_eq!(a.to_json(), b.to_json());
}
