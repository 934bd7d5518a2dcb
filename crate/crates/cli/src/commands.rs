use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use hyperaudit_core::datasets::{
    generate_synthetic, invariant_plane_eval, linspace, load_dataset, write_dataset, StressUnit,
};
use hyperaudit_core::model::fixtures::reference_material;
use hyperaudit_core::model::{load_model, save_model, ModelDescriptor, ModelFile};
use hyperaudit_core::training::{self, evaluate_fit, fit, ModeFit, TrainConfig, TrainError};
use hyperaudit_core::validators::{validate_all, ToleranceConfig};
use hyperaudit_core::{ConstitutiveModel, LoadingMode};
use serde_json::json;

use crate::args::{EvaluateArgs, GenerateArgs, TrainArgs, ValidateArgs};
use crate::{Failure, EXIT_DIVERGED, EXIT_VIOLATION};

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn load(path: &Path) -> anyhow::Result<ConstitutiveModel> {
    load_model(path).with_context(|| format!("loading model {}", path.display()))
}

/// Per-mode R²/MSE table.
pub fn fit_table(modes: &[ModeFit]) -> String {
    let mut s = format!("{:<22} {:>6} {:>12} {:>14}\n", "mode", "points", "R2", "MSE");
    for m in modes {
        let r2 = m.r2.map_or("n/a".to_string(), |r| format!("{r:.6}"));
        s.push_str(&format!("{:<22} {:>6} {:>12} {:>14.6e}\n", m.mode.name(), m.points, r2, m.mse));
    }
    s
}

pub fn validate(a: ValidateArgs) -> Result<u8, Failure> {
    let tol = a.tol.apply(ToleranceConfig::default())?;
    let model = load(&a.model)?;
    let report = validate_all(&model, &tol);
    match &a.out {
        Some(p) => fs::write(p, report.to_json()).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{}", report.to_json()),
    }
    for v in &report.verdicts {
        eprintln!("{:<28} {}", v.id.name(), if v.passed { "pass" } else { "FAIL" });
    }
    eprintln!("{}/9 constraints passed", report.passed_count());
    Ok(if report.overall { 0 } else { EXIT_VIOLATION })
}

enum Start {
    Descriptor(ModelDescriptor),
    Model(ConstitutiveModel),
}

fn read_start(path: &Path) -> anyhow::Result<Start> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if value.get("version").is_some() {
        let file: ModelFile = serde_json::from_value(value).with_context(|| format!("parsing {}", path.display()))?;
        return Ok(Start::Model(file.into_model()?));
    }
    let d: ModelDescriptor = serde_json::from_value(value).with_context(|| format!("parsing {}", path.display()))?;
    d.validate()?;
    Ok(Start::Descriptor(d))
}

pub fn train(a: TrainArgs) -> Result<u8, Failure> {
    let ds = load_dataset(&a.manifest).with_context(|| format!("loading dataset {}", a.manifest.display()))?;
    let start = read_start(&a.descriptor)?;
    let mut cfg: TrainConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => TrainConfig::default(),
    };
    if let Some(e) = a.epochs {
        cfg.epochs = e;
    }
    if let Some(lr) = a.learning_rate {
        cfg.learning_rate = lr;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let result = match &start {
        Start::Descriptor(d) => fit(d, &ds, &cfg),
        Start::Model(m) => training::train(m, &ds, &cfg),
    };
    let (model, report) = match result {
        Ok(r) => r,
        Err(e @ TrainError::NonFiniteLoss { .. }) => return Err(Failure::new(EXIT_DIVERGED, e)),
        Err(e) => return Err(Failure::from(anyhow::Error::new(e).context("training failed"))),
    };
    create_dir(&a.out)?;
    save_model(&model, a.out.join("model.json")).context("writing model.json")?;
    write_json(&a.out.join("fit.json"), &report)?;
    print!("{}", fit_table(&report.modes));
    println!("best loss {:.6e} at epoch {}", report.best_loss, report.best_epoch);
    Ok(0)
}

pub fn evaluate(a: EvaluateArgs) -> Result<u8, Failure> {
    if a.manifest.is_none() && !a.plane {
        return Err(anyhow!("nothing to evaluate: pass --manifest and/or --plane").into());
    }
    let model = load(&a.model)?;
    let ds = match &a.manifest {
        Some(p) => Some(load_dataset(p).with_context(|| format!("loading dataset {}", p.display()))?),
        None => None,
    };
    create_dir(&a.out)?;
    if let Some(ds) = &ds {
        let modes = evaluate_fit(&model, ds).context("evaluating fit")?;
        let r2: Vec<f64> = modes.iter().filter_map(|m| m.r2).collect();
        let mean = (!r2.is_empty()).then(|| r2.iter().sum::<f64>() / r2.len() as f64);
        write_json(&a.out.join("fit.json"), &json!({ "dataset": ds.name, "modes": modes, "mean_r2": mean }))?;
        print!("{}", fit_table(&modes));
    }
    if a.plane {
        let truth = match (&a.truth, ds.as_ref().and_then(|d| d.generator.as_ref())) {
            (Some(p), _) => load(p)?,
            (None, Some(g)) => g.model.clone().into_model()?,
            (None, None) => reference_material(),
        };
        let map = invariant_plane_eval(&model, &truth, a.lambda_max, a.plane_n)?;
        let path = a.out.join("plane.csv");
        fs::write(&path, map.to_csv()).with_context(|| format!("writing {}", path.display()))?;
        println!(
            "plane {}x{}: max rel err {:.6e}, off training paths {:.6e}",
            a.plane_n,
            a.plane_n,
            map.max_rel_err(),
            map.max_rel_err_off_paths()
        );
    }
    Ok(0)
}

pub fn generate(a: GenerateArgs) -> Result<u8, Failure> {
    let reference = match &a.reference {
        Some(p) => load(p)?,
        None => reference_material(),
    };
    if a.points < 2 {
        return Err(anyhow!("--points must be at least 2").into());
    }
    let params = linspace(1.0, 3.0, a.points);
    let modes: Vec<_> = [LoadingMode::UniaxialTension, LoadingMode::Equibiaxial, LoadingMode::PureShear]
        .into_iter()
        .map(|m| (m, params.clone()))
        .collect();
    let ds = generate_synthetic(&reference, &a.name, StressUnit::MPa, &modes)?;
    let manifest = write_dataset(&ds, &a.out)?;
    println!("{}", manifest.display());
    Ok(0)
}
