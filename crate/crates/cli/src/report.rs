use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context};
use hyperaudit_agents::analytics::CategoryCounts;
use hyperaudit_agents::{ConfusionSummary, PipelineState};
use hyperaudit_core::validators::ConstraintId;
use serde::Serialize;

use crate::args::ReportArgs;
use crate::commands::{read_json, write_json};
use crate::run::RunSummary;
use crate::Failure;

/// Summary files under the given directories. A directory without
/// `summary.json` contributes its `run_*` subdirectories.
fn collect(dirs: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for d in dirs {
        let direct = d.join("summary.json");
        if direct.is_file() {
            out.push(direct);
            continue;
        }
        ensure!(d.is_dir(), "{} is not a run directory", d.display());
        let mut found = false;
        for entry in fs::read_dir(d).with_context(|| format!("reading {}", d.display()))? {
            let p = entry?.path();
            let is_run = p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("run_"));
            if is_run && p.join("summary.json").is_file() {
                out.push(p.join("summary.json"));
                found = true;
            }
        }
        ensure!(found, "{} holds no summary.json", d.display());
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct AccuracyRow {
    pub round: usize,
    pub mode: String,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Serialize)]
pub struct TransitionRow {
    pub from: PipelineState,
    pub to: PipelineState,
    pub count: usize,
    pub frequency: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub runs: usize,
    pub aborted_runs: usize,
    pub confusion: ConfusionSummary,
    pub adhering_accuracy: Option<f64>,
    pub violating_accuracy: Option<f64>,
    pub transitions: Vec<TransitionRow>,
    pub tool_histogram: BTreeMap<ConstraintId, usize>,
    pub accuracy: Vec<AccuracyRow>,
}

/// Mean and population standard deviation.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Row-normalized transition frequencies over every state pair.
pub fn transition_matrix(summaries: &[RunSummary]) -> Vec<TransitionRow> {
    let mut counts: BTreeMap<(PipelineState, PipelineState), usize> = BTreeMap::new();
    for t in summaries.iter().flat_map(|s| &s.transitions) {
        *counts.entry((t.from, t.to)).or_default() += 1;
    }
    let mut rows = Vec::new();
    for from in PipelineState::ALL {
        let total: usize = PipelineState::ALL.iter().map(|&to| counts.get(&(from, to)).copied().unwrap_or(0)).sum();
        for to in PipelineState::ALL {
            let count = counts.get(&(from, to)).copied().unwrap_or(0);
            let frequency = if total == 0 { 0.0 } else { count as f64 / total as f64 };
            rows.push(TransitionRow { from, to, count, frequency });
        }
    }
    rows
}

/// Per-round mean/std of exported-model R², per mode and overall.
pub fn accuracy_table(summaries: &[RunSummary], clip: bool) -> Vec<AccuracyRow> {
    let mut groups: BTreeMap<(usize, String), Vec<f64>> = BTreeMap::new();
    let c = |r: f64| if clip { r.max(0.0) } else { r };
    for s in summaries {
        for r in s.rounds.iter().filter(|r| r.exported) {
            for (mode, v) in &r.mode_r2 {
                if let Some(v) = v {
                    groups.entry((r.round, mode.clone())).or_default().push(c(*v));
                }
            }
            if !r.mode_r2.is_empty() {
                let defined: Vec<f64> = r.mode_r2.values().flatten().map(|&v| c(v)).collect();
                if !defined.is_empty() {
                    let m = defined.iter().sum::<f64>() / defined.len() as f64;
                    groups.entry((r.round, "all".to_string())).or_default().push(m);
                }
            }
        }
    }
    groups
        .into_iter()
        .map(|((round, mode), xs)| {
            let (mean, std) = mean_std(&xs);
            AccuracyRow { round, mode, n: xs.len(), mean, std }
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn category_line(name: &str, c: &CategoryCounts) -> String {
    format!(
        "{name},{},{},{},{},{},{}\n",
        c.flagged,
        c.labeled,
        c.truly_adhering,
        c.truly_violating,
        fmt_opt(c.truly_adhering_fraction()),
        fmt_opt(c.truly_violating_fraction())
    )
}

fn write(dir: &Path, name: &str, body: &str) -> anyhow::Result<()> {
    let p = dir.join(name);
    fs::write(&p, body).with_context(|| format!("writing {}", p.display()))
}

pub fn build(summaries: &[RunSummary], clip: bool) -> Report {
    let confusion = ConfusionSummary::aggregate(summaries.iter().map(|s| &s.confusion));
    let mut tool_histogram: BTreeMap<ConstraintId, usize> = ConstraintId::ALL.into_iter().map(|id| (id, 0)).collect();
    for s in summaries {
        for (id, n) in &s.tool_histogram {
            *tool_histogram.entry(*id).or_default() += n;
        }
    }
    Report {
        runs: summaries.len(),
        aborted_runs: summaries.iter().filter(|s| s.aborted).count(),
        adhering_accuracy: confusion.adhering_accuracy(),
        violating_accuracy: confusion.violating_accuracy(),
        confusion,
        transitions: transition_matrix(summaries),
        tool_histogram,
        accuracy: accuracy_table(summaries, clip),
    }
}

pub fn report(a: ReportArgs) -> Result<u8, Failure> {
    if a.runs.is_empty() {
        return Err(anyhow::anyhow!("no run directories given").into());
    }
    let files = collect(&a.runs)?;
    let summaries: Vec<RunSummary> = files.iter().map(|p| read_json(p)).collect::<anyhow::Result<_>>()?;
    let r = build(&summaries, a.clip_negative_r2);
    let out = &a.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    write_json(&out.join("confusion.json"), &r.confusion)?;

    let mut s = String::from("category,flagged,labeled,truly_adhering,truly_violating,truly_adhering_fraction,truly_violating_fraction\n");
    s.push_str(&category_line("flagged_adhering", &r.confusion.flagged_adhering));
    s.push_str(&category_line("flagged_violating", &r.confusion.flagged_violating));
    write(out, "adherence.csv", &s)?;

    let mut s = String::from("constraint,flagged_violated,actually_violated,both_violated,labeled\n");
    for (id, c) in &r.confusion.per_constraint {
        let _ = writeln!(s, "{},{},{},{},{}", id.name(), c.flagged_violated, c.actually_violated, c.both_violated, c.labeled);
    }
    write(out, "constraint_histogram.csv", &s)?;

    let mut s = String::from("from,to,count,frequency\n");
    for t in &r.transitions {
        let _ = writeln!(s, "{},{},{},{}", t.from.name(), t.to.name(), t.count, t.frequency);
    }
    write(out, "transitions.csv", &s)?;

    let total: usize = r.tool_histogram.values().sum();
    let mut s = String::from("constraint,calls,fraction\n");
    for (id, n) in &r.tool_histogram {
        let f = if total == 0 { 0.0 } else { *n as f64 / total as f64 };
        let _ = writeln!(s, "{},{n},{f}", id.name());
    }
    write(out, "tool_histogram.csv", &s)?;

    let mut s = String::from("round,mode,n,mean_r2,std_r2\n");
    for row in &r.accuracy {
        let _ = writeln!(s, "{},{},{},{},{}", row.round, row.mode, row.n, row.mean, row.std);
    }
    write(out, "accuracy.csv", &s)?;

    write_json(&out.join("report.json"), &r)?;
    println!(
        "{} runs ({} aborted); flagged-adhering accuracy {}, flagged-violating accuracy {}",
        r.runs,
        r.aborted_runs,
        r.adhering_accuracy.map_or("n/a".into(), |x| x.to_string()),
        r.violating_accuracy.map_or("n/a".into(), |x| x.to_string()),
    );
    Ok(0)
}
