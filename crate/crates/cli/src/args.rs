use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use hyperaudit_core::validators::ToleranceConfig;

#[derive(Parser, Debug)]
#[command(name = "hyperaudit", version, about = "Audit, train and design hyperelastic constitutive networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run all nine constraint validators on a model file.
    Validate(ValidateArgs),
    /// Train a descriptor on a dataset.
    Train(TrainArgs),
    /// Fit metrics on a dataset and/or the invariant-plane error map.
    Evaluate(EvaluateArgs),
    /// Write a synthetic rubber dataset generated by a reference model.
    Generate(GenerateArgs),
    /// Run the Creator/Inspector pipeline.
    Pipeline(PipelineArgs),
    /// Aggregate pipeline run directories into tables.
    Report(ReportArgs),
}

/// Tolerance overrides; a file is applied first, flags after it.
#[derive(Args, Debug, Default, Clone)]
pub struct ToleranceArgs {
    /// JSON file with tolerance fields.
    #[arg(long)]
    pub tolerances: Option<PathBuf>,
    #[arg(long)]
    pub tau_rel: Option<f64>,
    #[arg(long)]
    pub tau_abs: Option<f64>,
    #[arg(long)]
    pub tau_loop: Option<f64>,
    #[arg(long)]
    pub tau_pointwise: Option<f64>,
    #[arg(long)]
    pub tau_norm: Option<f64>,
    /// Steps per path segment in the work checks.
    #[arg(long)]
    pub n_seg: Option<usize>,
    /// Log-stretch half-width of the ellipticity grid.
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Ellipticity grid points per axis.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Directions per ellipticity direction set.
    #[arg(long)]
    pub n_dirs: Option<usize>,
}

impl ToleranceArgs {
    pub fn apply(&self, base: ToleranceConfig) -> anyhow::Result<ToleranceConfig> {
        let mut t = match &self.tolerances {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => base,
        };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { t.$f = v; })* };
        }
        set!(tau_rel, tau_abs, tau_loop, tau_pointwise, tau_norm, n_seg, half_width, grid_n, n_dirs);
        t.validate().map_err(anyhow::Error::msg)?;
        Ok(t)
    }

    pub fn any(&self) -> bool {
        self.tolerances.is_some()
            || self.tau_rel.is_some()
            || self.tau_abs.is_some()
            || self.tau_loop.is_some()
            || self.tau_pointwise.is_some()
            || self.tau_norm.is_some()
            || self.n_seg.is_some()
            || self.half_width.is_some()
            || self.grid_n.is_some()
            || self.n_dirs.is_some()
    }
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Model file.
    pub model: PathBuf,
    /// Report path; printed to stdout when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub tol: ToleranceArgs,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Dataset manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Model descriptor, or a model file whose weights start the training.
    #[arg(long)]
    pub descriptor: PathBuf,
    /// Output directory for model.json and fit.json.
    #[arg(long, short, default_value = "train_out")]
    pub out: PathBuf,
    /// JSON training config; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Model file.
    pub model: PathBuf,
    /// Dataset manifest for fit metrics.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Emit the invariant-plane error map.
    #[arg(long)]
    pub plane: bool,
    /// Ground-truth model for the plane map; defaults to the dataset
    /// generator, then to the built-in reference material.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value_t = 3.0)]
    pub lambda_max: f64,
    /// Grid points per plane axis.
    #[arg(long, default_value_t = 40)]
    pub plane_n: usize,
    /// Output directory for fit.json and plane.csv.
    #[arg(long, short, default_value = "evaluate_out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Output directory.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Reference model file; the built-in Mooney-Rivlin material otherwise.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long, default_value = "synthetic_rubber")]
    pub name: String,
    /// Points per protocol between stretch 1 and 3.
    #[arg(long, default_value_t = 15)]
    pub points: usize,
}

#[derive(Args, Debug)]
pub struct PipelineArgs {
    /// JSON run config; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run directory (one subdirectory per run when runs > 1).
    #[arg(long, short, default_value = "pipeline_out")]
    pub out: PathBuf,
    /// Dataset manifest; synthetic rubber data when omitted.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Execute independent runs concurrently.
    #[arg(long)]
    pub parallel: bool,
    /// Enable validator tools for the Inspector.
    #[arg(long)]
    pub tools: bool,
    /// Mock creator script id, e.g. good_creator.
    #[arg(long)]
    pub creator: Option<String>,
    /// Mock inspector script id, e.g. oracle_inspector.
    #[arg(long)]
    pub inspector: Option<String>,
    /// Use the live endpoint from the environment for both roles.
    #[arg(long)]
    pub live: bool,
    #[arg(long)]
    pub refinement_rounds: Option<usize>,
    #[arg(long)]
    pub max_corrections: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub violating_export_probability: Option<f64>,
    #[command(flatten)]
    pub tol: ToleranceArgs,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Run directories (each holding summary.json).
    pub runs: Vec<PathBuf>,
    /// Output directory for the tables.
    #[arg(long, short, default_value = "report_out")]
    pub out: PathBuf,
    /// Clip negative R² to zero in accuracy tables.
    #[arg(long)]
    pub clip_negative_r2: bool,
}
