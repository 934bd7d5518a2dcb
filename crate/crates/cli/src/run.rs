use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use anyhow::Context;
use hyperaudit_agents::live::LiveSettings;
use hyperaudit_agents::pipeline::RoundOutcome;
use hyperaudit_agents::{
    ground_truth_label, run_pipeline_with_config, AgentError, BackendSpec, ConfusionSummary, PipelineConfig,
    PipelineRun, Transition,
};
use hyperaudit_core::datasets::{generate_synthetic, load_dataset, rubber_protocols, StressStrainDataset, StressUnit};
use hyperaudit_core::model::fixtures::reference_material;
use hyperaudit_core::validators::ConstraintId;
use serde::{Deserialize, Serialize};

use crate::args::PipelineArgs;
use crate::commands::{read_json, write_json};
use crate::{Failure, EXIT_ABORTED};

/// Pipeline config file.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunFile {
    pub pipeline: PipelineConfig,
    pub runs: Option<usize>,
    /// Dataset manifest, relative to the config file.
    pub manifest: Option<PathBuf>,
    /// Creator backend per run, cycled when shorter than the run count.
    pub creator_per_run: Vec<BackendSpec>,
}

/// Per-round entry of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub round: usize,
    pub exported: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abort_reason: Option<String>,
    pub proposals: usize,
    pub corrections: usize,
    pub tool_calls: usize,
    /// Mean per-mode R² of the exported model.
    pub mean_r2: Option<f64>,
    /// Per-mode R² of the exported model.
    pub mode_r2: BTreeMap<String, Option<f64>>,
}

/// `summary.json` of one run directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub creator: String,
    pub inspector: String,
    pub dataset: String,
    pub tools: bool,
    pub aborted: bool,
    pub exported: Vec<String>,
    pub best: Option<String>,
    pub best_mean_r2: Option<f64>,
    pub rounds: Vec<RoundSummary>,
    pub transitions: Vec<Transition>,
    pub tool_histogram: BTreeMap<ConstraintId, usize>,
    pub confusion: ConfusionSummary,
}

fn resolve_config(a: &PipelineArgs) -> anyhow::Result<(PipelineConfig, usize, Option<PathBuf>, Vec<BackendSpec>)> {
    let file: RunFile = match &a.config {
        Some(p) => read_json(p)?,
        None => RunFile::default(),
    };
    let base = a.config.as_ref().and_then(|p| p.parent().map(Path::to_path_buf));
    let mut cfg = file.pipeline;
    let mut per_run = file.creator_per_run;
    if a.live {
        cfg.creator = BackendSpec::Live(LiveSettings::default());
        cfg.inspector = BackendSpec::Live(LiveSettings::default());
        per_run.clear();
    }
    if let Some(c) = &a.creator {
        cfg.creator = BackendSpec::mock(c);
        per_run.clear();
    }
    if let Some(i) = &a.inspector {
        cfg.inspector = BackendSpec::mock(i);
    }
    if a.tools {
        cfg.tools = true;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(n) = a.refinement_rounds {
        cfg.refinement_rounds = n;
    }
    if let Some(n) = a.max_corrections {
        cfg.max_corrections = n;
    }
    if let Some(e) = a.epochs {
        cfg.train.epochs = e;
    }
    if let Some(p) = a.violating_export_probability {
        cfg.violating_export_probability = p;
    }
    if a.tol.any() {
        cfg.tolerances = a.tol.apply(cfg.tolerances.clone())?;
    }
    cfg.validate()?;
    let runs = a.runs.or(file.runs).unwrap_or(1);
    anyhow::ensure!(runs >= 1, "--runs must be at least 1");
    let manifest = match (&a.manifest, file.manifest) {
        (Some(m), _) => Some(m.clone()),
        (None, Some(m)) => Some(match &base {
            Some(b) if m.is_relative() => b.join(m),
            _ => m,
        }),
        (None, None) => None,
    };
    Ok((cfg, runs, manifest, per_run))
}

fn dataset(manifest: Option<&Path>) -> anyhow::Result<StressStrainDataset> {
    match manifest {
        Some(p) => load_dataset(p).with_context(|| format!("loading dataset {}", p.display())),
        None => Ok(generate_synthetic(
            &reference_material(),
            "synthetic_rubber",
            StressUnit::MPa,
            &rubber_protocols(),
        )?),
    }
}

fn summarize(run: &PipelineRun, index: usize) -> RunSummary {
    let rounds = run
        .rounds
        .iter()
        .map(|r| RoundSummary {
            round: r.round,
            exported: r.export.is_some(),
            abort_reason: match &r.outcome {
                RoundOutcome::Aborted { reason } => Some(reason.clone()),
                RoundOutcome::Exported => None,
            },
            proposals: r.attempts.len(),
            corrections: r.corrections,
            tool_calls: r.tool_calls(),
            mean_r2: r.export.as_ref().and_then(|e| e.fit.mean_r2()),
            mode_r2: r
                .export
                .iter()
                .flat_map(|e| &e.fit.modes)
                .map(|m| (m.mode.name().to_string(), m.r2))
                .collect(),
        })
        .collect();
    RunSummary {
        run: index,
        seed: run.config.seed,
        creator: run.creator_id.clone(),
        inspector: run.inspector_id.clone(),
        dataset: run.dataset.clone(),
        tools: run.config.tools,
        aborted: run.best_round.is_none(),
        exported: run.exports().map(|e| round_path(e.round)).collect(),
        best: run.best().map(|_| "model.json".to_string()),
        best_mean_r2: run.best().and_then(|e| e.fit.mean_r2()),
        rounds,
        transitions: run.transitions.clone(),
        tool_histogram: run.tool_histogram(),
        confusion: ground_truth_label(run),
    }
}

fn round_path(round: usize) -> String {
    format!("models/round_{round}.json")
}

/// Writes every artifact of one run into `dir`.
pub fn write_run(run: &PipelineRun, index: usize, dir: &Path) -> anyhow::Result<RunSummary> {
    fs::create_dir_all(dir.join("models")).with_context(|| format!("creating {}", dir.display()))?;
    for e in run.exports() {
        fs::write(dir.join(round_path(e.round)), e.model.to_json())?;
    }
    if let Some(best) = run.best() {
        fs::write(dir.join("model.json"), best.model.to_json())?;
        fs::write(dir.join("validation.json"), best.validation.to_json())?;
        write_json(&dir.join("fit.json"), &best.fit)?;
    }
    fs::write(dir.join("transcript.jsonl"), run.transcript.to_jsonl())?;
    write_json(&dir.join("run.json"), run)?;
    let summary = summarize(run, index);
    write_json(&dir.join("confusion.json"), &summary.confusion)?;
    write_json(&dir.join("tool_histogram.json"), &summary.tool_histogram)?;
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

enum Outcome {
    Done(RunSummary),
    Aborted,
}

fn one_run(cfg: PipelineConfig, ds: &StressStrainDataset, index: usize, dir: &Path) -> Result<Outcome, Failure> {
    match run_pipeline_with_config(&cfg, ds) {
        Ok(run) => Ok(Outcome::Done(write_run(&run, index, dir)?)),
        Err(AgentError::RunAborted(run)) => {
            write_run(&run, index, dir)?;
            Ok(Outcome::Aborted)
        }
        Err(e) => Err(anyhow::Error::new(e).context(format!("run {index}")).into()),
    }
}

pub fn pipeline(a: PipelineArgs) -> Result<u8, Failure> {
    let (cfg, runs, manifest, per_run) = resolve_config(&a)?;
    let ds = dataset(manifest.as_deref())?;
    let jobs: Vec<(PipelineConfig, PathBuf)> = (0..runs)
        .map(|k| {
            let mut c = cfg.clone();
            c.seed = cfg.seed.wrapping_add(k as u64);
            if !per_run.is_empty() {
                c.creator = per_run[k % per_run.len()].clone();
            }
            let dir = if runs == 1 { a.out.clone() } else { a.out.join(format!("run_{k:03}")) };
            (c, dir)
        })
        .collect();
    let results: Vec<Result<Outcome, Failure>> = if a.parallel && runs > 1 {
        thread::scope(|s| {
            let handles: Vec<_> = jobs
                .iter()
                .enumerate()
                .map(|(k, (c, dir))| {
                    let ds = &ds;
                    s.spawn(move || one_run(c.clone(), ds, k, dir))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect()
        })
    } else {
        jobs.iter()
            .enumerate()
            .map(|(k, (c, dir))| one_run(c.clone(), &ds, k, dir))
            .collect()
    };
    let mut aborted = 0;
    for (result, (_, dir)) in results.into_iter().zip(&jobs) {
        match result? {
            Outcome::Done(s) => {
                let best = dir.join(s.best.as_deref().unwrap_or("model.json"));
                println!("best model: {}", best.display());
                match s.best_mean_r2 {
                    Some(r) => println!("mean R2: {r:.6}"),
                    None => println!("mean R2: n/a"),
                }
            }
            Outcome::Aborted => {
                aborted += 1;
                eprintln!("run aborted without an exported model: {}", dir.display());
            }
        }
    }
    Ok(if aborted > 0 { EXIT_ABORTED } else { 0 })
}
